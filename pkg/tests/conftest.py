import os

from hypothesis import settings

settings.register_profile("suite", max_examples=60, deadline=None)
settings.register_profile("soak", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "suite"))
