from tichain.core.commands.bell.bell import app as bell_app

__all__ = [
    "bell_app",
]
