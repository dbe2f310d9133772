# Config, dataset and report utilities
