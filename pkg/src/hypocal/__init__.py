# Hypoplastic calibration Django app
