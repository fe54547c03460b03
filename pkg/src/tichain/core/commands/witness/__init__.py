from tichain.core.commands.witness.witness import app as witness_app

__all__ = [
    "witness_app",
]
