"""Write a synthetic study bundle (CSVs + bundle.yaml) into demo/bundle/.

The donors and the target share one covariate-driven shock law, so the
similarity-weighted correction has real signal to find.  Usage:

    python demo/make_bundle.py
    synthvol forecast --config demo/bundle/bundle.yaml --out report.json
    synthvol multiverse --config demo/bundle/bundle.yaml --out table.csv --format csv
"""

from pathlib import Path

from synthvol import CovariateModel, GarchParams, ShockSpec, build_delta, simulate_path

OUT = Path(__file__).parent / "bundle"

PARAMS = GarchParams(0.2, [0.1], [0.82])
P = 9
NAMES = [f"c{i}" for i in range(1, P + 1)]
DELTA = build_delta(P, 1.0)
COV = CovariateModel(P, 1.0, 0.125)


def write_series(name, seed, T, t_star):
    shock = ShockSpec(
        t_star=t_star, len_vol=1, mu_omega_star=0.5, delta=DELTA, sigma_u=0.125
    )
    path = simulate_path(PARAMS, shock, T, COV, seed=seed)
    returns_file = OUT / f"{name}_returns.csv"
    returns_file.write_text(
        "return\n" + "\n".join(repr(float(r)) for r in path.returns) + "\n"
    )
    cov_file = OUT / f"{name}_covariates.csv"
    rows = [f"{c},{float(v)!r}" for c, v in zip(NAMES, path.covariates[t_star])]
    cov_file.write_text("covariate,value\n" + "\n".join(rows) + "\n")
    return path


def main():
    OUT.mkdir(exist_ok=True)
    donors = []
    for i in range(4):
        t_star = 900 + 40 * i
        write_series(f"donor{i + 1}", 2000 + i, 1200 + 60 * i, t_star)
        donors.append((f"donor{i + 1}", t_star))
    target_path = write_series("target", 3000, 1300, 1000)
    truth = float(target_path.sigma2[1000])

    donor_blocks = []
    for name, t_star in donors:
        donor_blocks += [
            f"  - name: {name}",
            f"    returns: {name}_returns.csv",
            f"    covariates: {name}_covariates.csv",
            f"    t_star: {t_star}",
        ]
    config = "\n".join(
        [
            "seed: 0",
            "horizon: 1",
            "adjustment_length: 1",
            "loss: QL",
            "covariates: [" + ", ".join(NAMES) + "]",
            "target:",
            "  name: target",
            "  returns: target_returns.csv",
            "  covariates: target_covariates.csv",
            "  t_star: 1000",
            "donors:",
            *donor_blocks,
            "ground_truth:",
            f"  value: {truth!r}",
            "",
        ]
    )
    (OUT / "bundle.yaml").write_text(config)
    print(f"wrote bundle into {OUT} (true next-day variance: {truth:.4f})")


if __name__ == "__main__":
    main()
