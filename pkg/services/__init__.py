"""
Domain services of lgp-control: one package per workflow stage.
"""
