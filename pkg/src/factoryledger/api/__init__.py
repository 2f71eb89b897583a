from .app import create_app
from .auth import RegistrationToken, TokenTable
from .service import InProcessOrderer, LedgerService, SubmitOutcome
from .stream import EventBus

__all__ = [
    "EventBus",
    "InProcessOrderer",
    "LedgerService",
    "RegistrationToken",
    "SubmitOutcome",
    "TokenTable",
    "create_app",
]
