# Numerical services: model, element tests, cost, optimizer, statistics
