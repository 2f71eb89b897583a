"""Registration tokens.

Successful registration against the org registry issues a fresh random
bearer token bound to one org for a configurable TTL. Wrong secret and
unknown org are indistinguishable to callers, and secrets are compared
constant-time.
"""

from __future__ import annotations

import hmac
import secrets
from dataclasses import dataclass
from typing import Callable, Optional

from ..ledger.tx import OrgRegistry

DEFAULT_TTL_MS = 60 * 60 * 1000


class AuthError(Exception):
    pass


@dataclass(frozen=True)
class RegistrationToken:
    token: str  # 64-char lowercase hex
    org_id: str
    issued_at: int
    expires_at: int

    def to_dict(self) -> dict:
        return {
            "token": self.token,
            "org_id": self.org_id,
            "issued_at": self.issued_at,
            "expires_at": self.expires_at,
        }


class TokenTable:
    def __init__(
        self,
        registry: OrgRegistry,
        clock_ms: Callable[[], int],
        ttl_ms: int = DEFAULT_TTL_MS,
    ) -> None:
        self.registry = registry
        self.clock_ms = clock_ms
        self.ttl_ms = ttl_ms
        self._tokens: dict[str, RegistrationToken] = {}

    def register(self, org_id: str, secret: str) -> RegistrationToken:
        if not isinstance(org_id, str) or not isinstance(secret, str):
            raise AuthError("invalid credentials")
        if not self.registry.check(org_id, secret):
            raise AuthError("invalid credentials")
        now = self.clock_ms()
        token = RegistrationToken(
            token=secrets.token_hex(32),
            org_id=org_id,
            issued_at=now,
            expires_at=now + self.ttl_ms,
        )
        self._tokens[token.token] = token
        return token

    def org_for(self, presented: Optional[str]) -> Optional[str]:
        """The org a bearer token authorizes, or None."""
        if not presented or not isinstance(presented, str):
            return None
        # constant-time scan: don't leak which tokens exist via dict timing
        found = None
        for token, entry in self._tokens.items():
            if hmac.compare_digest(token, presented):
                found = entry
        if found is None:
            return None
        if self.clock_ms() >= found.expires_at:
            return None
        return found.org_id
