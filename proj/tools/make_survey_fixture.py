#!/usr/bin/env python3
"""Writes the 70-responder synthetic survey as ocsplab-audit-1 records.

Index layout: 0..52 realtime (0..51 also exposed to content scaling),
53..69 lightweight; SHA-1 signers are 0..28 and 52..62; CA-signed
responders are 51 and 64..69; 5..26 answer good for unknown serials.
"""
import argparse
import pathlib


def record(i: int) -> dict:
    realtime = i <= 52
    scaling = i <= 51
    if scaling:
        mirrored = i % 3 != 2
        if 5 <= i <= 26:
            nonexistent = "good"
        elif mirrored:
            nonexistent = ["unknown", "unauthorized", "close_connection"][i % 3]
        else:
            nonexistent = "unknown"
    else:
        mirrored = False
        nonexistent = ["unauthorized", "close_connection", "randomized"][i % 3]
    sha1 = i <= 28 or 52 <= i <= 62
    ca = i == 51 or i >= 64
    exposed = mirrored or nonexistent in ("unknown", "good")
    assert exposed == scaling
    if ca and exposed:
        grade = "critical"
    elif sha1 and exposed:
        grade = "high"
    elif exposed and realtime:
        grade = "elevated"
    else:
        grade = "low"
    b = lambda v: "true" if v else "false"
    return {
        "format": "ocsplab-audit-1",
        "endpoint": f"survey:responder-{i:02d}",
        "source": "survey-fixture",
        "partial": "false",
        "realtime": b(realtime),
        "nonce_mirrored": b(mirrored),
        "nonexistent_behavior": nonexistent,
        "scaling_exposed": b(exposed),
        "hash_algorithm": "sha1" if sha1 else "sha256",
        "cert_id_hash_algorithm": "sha1",
        "hash_disagreement": b(not sha1),
        "sha1_in_use": b(sha1),
        "ca_signed": b(ca),
        "granularity": "second",
        "good_for_nonexistent": b(nonexistent == "good"),
        "risk_grade": grade,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out", type=pathlib.Path, nargs="?",
                    default=pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "survey")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for i in range(70):
        text = "".join(f"{k}={v}\n" for k, v in record(i).items())
        (args.out / f"responder-{i:02d}.txt").write_text(text)


if __name__ == "__main__":
    main()
