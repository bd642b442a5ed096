"""Regenerate data/possum_predictions.csv.

Trains the AdaBoost black box once and stores its in-sample predictions next
to the raw features.  Not part of the library; needs the optional packages
``rdatasets`` (bundles the DAAG possum table) and ``scikit-learn``.

    python scripts/make_possum_predictions.py [--out data/possum_predictions.csv]
"""

import argparse

import numpy as np
import rdatasets
from sklearn.ensemble import AdaBoostRegressor

FEATURES = ["hdlngth", "skullw", "footlgth", "earconch", "chest", "belly"]
TARGET = "totlngth"


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default="data/possum_predictions.csv")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    df = rdatasets.data("DAAG", "possum").dropna().reset_index(drop=True)
    X = df[FEATURES].to_numpy(float)
    X = (X - X.mean(0)) / X.std(0)
    y = df[TARGET].to_numpy(float)

    model = AdaBoostRegressor(n_estimators=100, random_state=args.seed).fit(X, y)
    pred = model.predict(X)
    print(f"n={len(y)}  in-sample MSE={np.mean((pred - y) ** 2):.3f}  "
          f"mean length={y.mean():.2f}  sd={y.std(ddof=1):.2f}")

    out = df[["case"] + FEATURES + [TARGET]].copy()
    out["prediction"] = np.round(pred, 6)
    out.to_csv(args.out, index=False, float_format="%.6g")


if __name__ == "__main__":
    main()
