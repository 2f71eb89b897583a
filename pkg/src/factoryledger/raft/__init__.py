from .cutter import BatchPolicy, BlockCutter
from .messages import AppendEntries, AppendResponse, LogEntry, RequestVote, VoteResponse
from .node import NotLeader, RaftConfig, RaftNode, Role
from .simnet import NetConfig, SimTrace, run_simulation

__all__ = [
    "AppendEntries",
    "AppendResponse",
    "BatchPolicy",
    "BlockCutter",
    "LogEntry",
    "NetConfig",
    "NotLeader",
    "RaftConfig",
    "RaftNode",
    "RequestVote",
    "Role",
    "SimTrace",
    "VoteResponse",
    "run_simulation",
]
