"""Block cutting: size trigger, timeout trigger, order preservation."""

import random

from factoryledger.canonical import ZERO_HASH
from factoryledger.ledger import build_transaction
from factoryledger.raft import BatchPolicy, BlockCutter
from factoryledger.records import DefectRecord, Importance


def mk_tx(n):
    rec = DefectRecord(
        record_id=f"00000000-0000-5000-8000-{n:012d}",
        sensor_id="Conv1_Temperature",
        fault_type="OverTemperature",
        value=75.0 + n,
        unit="degC",
        importance=Importance.WARNING,
        timestamp=1700000000000 + n,
    )
    return build_transaction(rec, "cell-defects", "Org1", "secret-one")


def fresh_cutter(max_tx=10, max_wait=20):
    return BlockCutter(
        BatchPolicy(max_tx=max_tx, max_wait=max_wait),
        channel_id="cell-defects",
        tip_number=0,
        tip_hash=ZERO_HASH,
    )


def test_size_trigger_cuts_immediately():
    cutter = fresh_cutter(max_tx=10)
    blocks = []
    for i in range(10):
        block = cutter.offer(mk_tx(i), now=5, now_ms=500)
        if block:
            blocks.append(block)
    assert len(blocks) == 1
    assert len(blocks[0].transactions) == 10
    assert blocks[0].header.number == 1


def test_timeout_trigger_cuts_partial_batch():
    cutter = fresh_cutter(max_wait=20)
    assert cutter.offer(mk_tx(0), now=100, now_ms=0) is None
    assert cutter.poll(now=119, now_ms=0) is None
    block = cutter.poll(now=120, now_ms=12000)
    assert block is not None
    assert len(block.transactions) == 1
    assert block.header.timestamp == 12000


def test_blocks_chain_off_tip():
    cutter = fresh_cutter(max_tx=2)
    b1 = None
    for i in range(2):
        b1 = cutter.offer(mk_tx(i), now=1, now_ms=100) or b1
    b2 = None
    for i in range(2, 4):
        b2 = cutter.offer(mk_tx(i), now=2, now_ms=200) or b2
    assert b1.header.previous_hash == ZERO_HASH
    assert b2.header.previous_hash == b1.block_hash
    assert (b1.header.number, b2.header.number) == (1, 2)


def test_order_preserved_over_random_schedules():
    # oracle: concatenating cut blocks must reproduce the input sequence
    # exactly, whatever the interleaving of arrivals and timer polls
    rng = random.Random(99)
    for trial in range(1000):
        max_tx = rng.randint(1, 8)
        max_wait = rng.randint(0, 30)
        cutter = fresh_cutter(max_tx=max_tx, max_wait=max_wait)
        n_txs = rng.randint(0, 40)
        txs = [mk_tx(trial * 1000 + i) for i in range(n_txs)]
        emitted = []
        now = 0
        queue = list(txs)
        while queue or cutter.pending:
            now += 1
            if queue and rng.random() < 0.4:
                block = cutter.offer(queue.pop(0), now=now, now_ms=now * 100)
                if block:
                    emitted.append(block)
            block = cutter.poll(now=now, now_ms=now * 100)
            if block:
                emitted.append(block)
        got = [tx.tx_id for block in emitted for tx in block.transactions]
        assert got == [tx.tx_id for tx in txs]
        numbers = [block.header.number for block in emitted]
        assert numbers == list(range(1, len(emitted) + 1))
        for prev, cur in zip(emitted, emitted[1:]):
            assert cur.header.previous_hash == prev.block_hash
