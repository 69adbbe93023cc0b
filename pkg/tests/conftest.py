from hypothesis import settings

# property tests are seeded so a green run stays green
settings.register_profile("repo", derandomize=True, deadline=None)
settings.load_profile("repo")
