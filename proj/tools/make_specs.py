#!/usr/bin/env python3
"""Regenerates the bundled workload specs and task parameter files in data/."""
import json
import pathlib

ROOT = pathlib.Path(__file__).resolve().parent.parent / "data"


def entries(rows):
    return [":".join(str(v) for v in row) for row in rows]


def arducopter():
    s1 = [(4, k, -1, 1, -1) for k in range(3, 17)]
    s2 = [(3, k, -1, 1, -1) for k in range(17, 32)]
    s3 = [(4, k, -1, 2, -1) for k in range(20, 37)]
    s4 = [(180, k, -1, 11, -1) for k in range(40, 57)]
    s5 = [(3 if j % 2 == 0 else 4, 60 + j, -1, 1, -1) for j in range(18)]
    seqs = []
    for rows, p in [(s1, 0.95), (s2, 0.02), (s3, 0.01), (s4, 0.01), (s5, 0.01)]:
        seqs.append({"entries": entries(rows), "probability": p, "duration_ns": 1303419})
    return {
        "schema_version": 1,
        "seed": 7,
        "epoch_ns": 1601405431000000000,
        "tasks": [{
            "comm": "arducopter", "exe": "/home/pi/ardupilot/build/navio2/bin/arducopter",
            "pid": 1526, "tid": 1526, "ppid": 1,
            "init_records": 679, "period_ns": 2500000, "jitter_ns": 100000,
            "iterations": 100, "sequences": seqs,
        }],
    }


def ap_rcin():
    rows = [(180, k, -1, 11, -1) for k in range(17, 33)]
    return {
        "schema_version": 1,
        "seed": 11,
        "epoch_ns": 1601405431000000000,
        "tasks": [{
            "comm": "ap-rcin", "exe": "/home/pi/ardupilot/build/navio2/bin/arducopter",
            "pid": 1526, "tid": 1531, "ppid": 1,
            "init_records": 2, "period_ns": 20000000, "jitter_ns": 200000,
            "iterations": 182,
            "sequences": [{"entries": entries(rows), "probability": 1.0, "duration_ns": 671567}],
        }],
    }


def ap_spi():
    seqs = [
        ([(3, 55, -1, 8, -1)], 0.645),
        ([(4, 55, -1, 8, -1)], 0.182),
        ([(3, 56, -1, 8, -1)], 0.170),
        ([(54, 55, -1, -1, -1), (3, 57, -1, 8, -1)], 0.001),
        ([(54, 56, -1, -1, -1), (4, 57, -1, 8, -1)], 0.002),
    ]
    return {
        "schema_version": 1,
        "seed": 13,
        "epoch_ns": 1601405431000000000,
        "tasks": [{
            "comm": "ap-spi-0", "exe": "/home/pi/ardupilot/build/navio2/bin/arducopter",
            "pid": 1526, "tid": 1533, "ppid": 1,
            "init_records": 0, "period_ns": 2000000, "jitter_ns": 50000,
            "iterations": 1599,
            "sequences": [{"entries": entries(r), "probability": p, "duration_ns": 20000} for r, p in seqs],
        }],
    }


MOTION_RATES = [48.2, 48.0, 44.2, 33.2, 27.6, 29.7, 20.9, 8.4]  # events per second


def motion(k, rate):
    length = 8
    period = int(round(length / rate * 1e9))
    rows = [(3 if j % 2 == 0 else 4, 5 + j, -1, 4096, -1) for j in range(length)]
    return {
        "schema_version": 1,
        "seed": 100 + k,
        "epoch_ns": 1601405431000000000,
        "tasks": [{
            "comm": f"motion-{k}", "exe": "/usr/bin/motion",
            "pid": 2000 + k, "tid": 2000 + k, "ppid": 1,
            "init_records": 40, "period_ns": period, "jitter_ns": period // 20,
            "iterations": 100,
            "sequences": [{"entries": entries(rows), "probability": 1.0, "duration_ns": period // 10}],
        }],
    }


PARAMS = {
    "tasks": [
        {"name": "arducopter", "I": 100, "len": [14, 15, 17, 17, 18],
         "p": [0.95, 0.02, 0.01, 0.01, 0.01], "f": 679, "n": 1},
        {"name": "ap-rcin", "I": 182, "len": [16], "p": [1.0], "f": 2, "n": 1},
        {"name": "ap-spi-0", "I": 1599, "len": [1, 1, 1, 2, 2],
         "p": [0.645, 0.182, 0.170, 0.001, 0.002], "f": 0, "n": 1},
    ]
}


def dump(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def main():
    dump(ROOT / "specs" / "arducopter.json", arducopter())
    dump(ROOT / "specs" / "ap-rcin.json", ap_rcin())
    dump(ROOT / "specs" / "ap-spi-0.json", ap_spi())
    for k, rate in enumerate(MOTION_RATES, start=1):
        dump(ROOT / "specs" / f"motion-{k}.json", motion(k, rate))
    dump(ROOT / "params" / "case-study.json", PARAMS)
    dump(ROOT / "params" / "arducopter.json", PARAMS["tasks"][0])


if __name__ == "__main__":
    main()
