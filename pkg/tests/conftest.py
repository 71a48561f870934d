import hypothesis

hypothesis.settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow])
hypothesis.settings.register_profile(
    "fast", max_examples=15, deadline=None)
hypothesis.settings.load_profile("default")
