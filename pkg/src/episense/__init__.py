"""Sentiment-augmented COVID-19 case analysis for paired regions.

Modules: ``corpus`` (input parsing), ``series`` (transforms and divergence
detection), ``concepts`` (embedding concept matching), ``sentiment``
(scoring and daily aggregation), ``regress`` (OLS forecasting),
``explain`` (causal trigger explanations), ``synth`` (seeded synthetic data)
and ``cli``.
"""

__version__ = "0.1.0"
