"""Desk-scale factory-to-ledger pipeline.

Subpackages:
- sim: deterministic factory cell + supply-chain container simulator
- gateway: threshold rules, debounce, defect record construction, submission
- ledger: channels, hash-chained blocks, validation, world state, queries
- raft: ordering service (consensus core, deterministic simnet, block cutter)
- api: HTTP facade (registration tokens, defect writes, queries, event stream)
- harness: scenario runner and CLI
"""

__version__ = "0.1.0"
