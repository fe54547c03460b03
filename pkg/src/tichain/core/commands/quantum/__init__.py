from tichain.core.commands.quantum.quantum import app as quantum_app

__all__ = [
    "quantum_app",
]
