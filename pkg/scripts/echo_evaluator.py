#!/usr/bin/env python3
"""Stand-in external evaluator speaking the line protocol.

Answers each request ``{"id", "x"}`` with ``f = sum(x)``. Extra behaviours for
exercising error paths:

    --persistent     serve requests until stdin closes (default: answer one)
    --log PATH       append every received x to PATH, one JSON array per line
    --fail           exit 3 immediately without answering
    --bad-id         answer with id + 1000
    --garbage        answer with a non-JSON line
    --sleep SECONDS  wait before answering
    --file IN OUT    read the request from IN and write the reply to OUT
"""

import argparse
import json
import sys
import time


def answer(line, args):
    record = json.loads(line)
    if args.log:
        with open(args.log, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record["x"]) + "\n")
    if args.sleep:
        time.sleep(args.sleep)
    if args.garbage:
        return "this is not json\n"
    rid = record["id"] + (1000 if args.bad_id else 0)
    return json.dumps({"id": rid, "f": float(sum(record["x"]))}, separators=(",", ":")) + "\n"


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--persistent", action="store_true")
    parser.add_argument("--log")
    parser.add_argument("--fail", action="store_true")
    parser.add_argument("--bad-id", action="store_true")
    parser.add_argument("--garbage", action="store_true")
    parser.add_argument("--sleep", type=float, default=0.0)
    parser.add_argument("--file", nargs=2)
    args = parser.parse_args()

    if args.fail:
        sys.stderr.write("evaluator refused to start\n")
        sys.exit(3)
    if args.file:
        with open(args.file[0], encoding="utf-8") as fh:
            reply = answer(fh.readline(), args)
        with open(args.file[1], "w", encoding="utf-8") as fh:
            fh.write(reply)
        return
    for line in sys.stdin:
        if not line.strip():
            continue
        sys.stdout.write(answer(line, args))
        sys.stdout.flush()
        if not args.persistent:
            break


if __name__ == "__main__":
    main()
