"""Abstract domain, expression folding, MOD summaries and alias binding.

Submodules are imported directly (``residua.analysis.domain`` etc.); the
frontend depends on :mod:`.locations`, so this package stays import-light.
"""
