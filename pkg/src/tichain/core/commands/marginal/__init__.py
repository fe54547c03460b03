from tichain.core.commands.marginal.marginal import app as marginal_app

__all__ = [
    "marginal_app",
]
