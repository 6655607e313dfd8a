import prometheus_client

solves = prometheus_client.Counter("blochmix_solves", "Closed-form approximations returned, by branch", labelnames=["branch"])
oracle_runs = prometheus_client.Counter("blochmix_oracle_runs", "Numerical oracle invocations", labelnames=["mode"])
oracle_iterations = prometheus_client.Counter("blochmix_oracle_iterations", "Projected-gradient iterations performed")
oracle_failures = prometheus_client.Counter("blochmix_oracle_failures", "Oracle runs which hit the iteration limit")
reduction_steps = prometheus_client.Counter("blochmix_reduction_steps", "Support eliminations performed by decomposition reduction")
sweep_rows = prometheus_client.Counter("blochmix_sweep_rows", "Parameter sweep grid points evaluated")
