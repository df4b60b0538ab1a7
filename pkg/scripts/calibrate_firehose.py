"""Print the generator's triple counts and document sizes for a few seeds.

    python scripts/calibrate_firehose.py --count 10000 --seeds 0 1 7 42
"""

import argparse
import statistics
import zlib

from rdfstream.firehose import Firehose, FirehoseConfig, tweet_to_transaction
from rdfstream.model import transaction_stats
from rdfstream.rdftx import serialize_rdftx


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=10_000)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 7, 42])
    ap.add_argument("--session", type=float, default=None)
    args = ap.parse_args()

    cfg = FirehoseConfig()
    if args.session is not None:
        cfg = FirehoseConfig(session_probability=args.session)
    print("seed  adds   removes  total  repeat  doc_mean  doc_median  deflate_median  fit")
    for seed in args.seeds:
        hose = Firehose(seed, cfg)
        adds, removes, sizes, packed = [], [], [], []
        seen = set()
        repeats = 0
        for _ in range(args.count):
            tweet = hose.next_tweet()
            if tweet.author.author_id in seen:
                repeats += 1
            seen.add(tweet.author.author_id)
            tx = tweet_to_transaction(tweet, hose.registry, cfg)
            a, r, _ = transaction_stats(tx)
            adds.append(a)
            removes.append(r)
            doc = serialize_rdftx(tx)
            sizes.append(len(doc))
            packed.append(len(zlib.compress(doc, 6)))
        fit = sum(p <= 1491 for p in packed) / len(packed)
        print(
            f"{seed:<5} {statistics.fmean(adds):6.2f} {statistics.fmean(removes):7.2f}"
            f"  {statistics.fmean(adds) + statistics.fmean(removes):6.2f}  {repeats / args.count:6.3f}"
            f"  {statistics.fmean(sizes):8.0f}  {statistics.median(sizes):10.0f}"
            f"  {statistics.median(packed):14.0f}  {fit:.3f}"
        )


if __name__ == "__main__":
    main()
