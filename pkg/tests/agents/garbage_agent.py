"""Stub agent: valid answers except at step argv[1], where it writes a non-JSON line."""
import json
import sys

bad_step = int(sys.argv[1]) if len(sys.argv) > 1 else 3


def emit(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


for line in sys.stdin:
    msg = json.loads(line)
    kind = msg.get("type")
    if kind == "hello":
        emit({"type": "hello", "protocol_version": "1"})
    elif kind == "propose_request":
        if msg["t"] == bad_step:
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
        else:
            emit({"type": "propose_response", "request_id": msg["request_id"], "candidates": [0, 4, 8]})
    elif kind == "shutdown":
        break
