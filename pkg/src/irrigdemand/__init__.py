"""Irrigation water demand forecasting from delivery statements and weather.

Modules:

- ``core``: records, schema, usage bins, validation
- ``ingest``: weather, delivery and farm CSV parsers; delivery intervals
- ``preprocess``: EWD / REP disaggregation and the daily dataset
- ``c45``: gain-ratio decision trees, rules, JSON format
- ``sysfor``: SysFor forests and Voting-2
- ``etc_baseline``: K_c x ET_o baseline
- ``evaluation``: k-fold accuracy, seasonal demand, node reports
- ``synth``: seeded synthetic scenarios with known usage
- ``cli``: the ``irrigdemand`` command
"""

__version__ = "0.1.0"
