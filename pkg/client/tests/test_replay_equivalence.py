"""Protocol-equivalence acceptance: an action log recorded by an in-process
run, replayed over the wire, must yield the identical episode record."""
import json

from conftest import ServerProcess, free_port
from poinav_client import connect, replay_policy, run_policy


def test_wire_replay_matches_in_process_records(scene_file, oracle_results, tmp_path):
    records = oracle_results["records"]
    assert records and all(r["status"] == "success" for r in records)

    port = free_port()
    # same seed and episode shape as the in-process run, so the server deals
    # out exactly the same episodes in the same order
    server = ServerProcess(scene_file, tmp_path / "served.json", port,
                           extra=["--episodes-per-poi", 1, "--seed", 5])
    mismatches = 0
    try:
        for expected in records:
            session = connect("127.0.0.1", port)
            summary = run_policy(session, replay_policy(expected["actions"]))
            session.close()
            if summary.metrics != expected:
                mismatches += 1
        assert mismatches == 0
        server.wait()
        # the server-side results carry the same records
        served = json.loads((tmp_path / "served.json").read_text())
        assert served["records"] == records
    finally:
        server.stop()
    print(f"\n[PASS] protocol equivalence: {len(records)} recorded episodes replayed "
          f"over the wire with identical records ({mismatches} mismatches)")
