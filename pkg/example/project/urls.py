"""
URL configuration for the CatEquiv example project.

CatEquiv is command-line only; no routes are exposed.
"""

urlpatterns: list = []
