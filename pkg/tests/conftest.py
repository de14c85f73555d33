from synthvol import (
    CovariateModel,
    Donor,
    GarchParams,
    ShockSpec,
    TargetSeries,
    build_delta,
    simulate_path,
)

BASE_PARAMS = GarchParams(0.2, [0.1], [0.82])


def synth_bundle(
    n_donors=4,
    p=9,
    seed=11,
    mu_delta=1.0,
    mu_v=1.0,
    sigma_v=0.125,
    mu_omega_star=0.5,
    sigma_u=0.125,
):
    """Simulated study bundle: target + donors with shared shock law."""
    delta = build_delta(p, mu_delta)
    cm = CovariateModel(p, mu_v, sigma_v)
    names = tuple(f"c{i}" for i in range(1, p + 1))

    def series(sub_seed, T, t_star):
        shock = ShockSpec(
            t_star=t_star,
            len_vol=1,
            mu_omega_star=mu_omega_star,
            delta=delta,
            sigma_u=sigma_u,
        )
        return simulate_path(BASE_PARAMS, shock, T, cm, seed=sub_seed)

    donors = []
    for i in range(n_donors):
        T = 1200 + 50 * i
        t_star = 900 + 30 * i
        path = series(100 * seed + i, T, t_star)
        donors.append(Donor(f"d{i + 1}", path.returns, path.covariates[t_star], t_star))
    t_star = 1000
    tpath = series(100 * seed + 99, 1300, t_star)
    target = TargetSeries("study", tpath.returns, tpath.covariates[t_star], t_star)
    ground_truth = float(tpath.sigma2[t_star])
    return target, tuple(donors), names, ground_truth


def write_bundle_files(tmp_path, target, donors, names, ground_truth, loss="QL"):
    """Materialize a bundle as CSVs plus a YAML config; returns the config path."""

    def dump_returns(name, returns):
        path = tmp_path / f"{name}_returns.csv"
        lines = ["return"] + [repr(float(r)) for r in returns]
        path.write_text("\n".join(lines) + "\n")
        return path.name

    def dump_covs(name, vector):
        path = tmp_path / f"{name}_cov.csv"
        lines = ["covariate,value"] + [
            f"{c},{float(v)!r}" for c, v in zip(names, vector)
        ]
        path.write_text("\n".join(lines) + "\n")
        return path.name

    donor_blocks = []
    for d in donors:
        donor_blocks.append(
            "\n".join(
                [
                    f"  - name: {d.name}",
                    f"    returns: {dump_returns(d.name, d.returns)}",
                    f"    covariates: {dump_covs(d.name, d.profile_covariates)}",
                    f"    t_star: {d.t_star}",
                ]
            )
        )
    config = "\n".join(
        [
            "seed: 0",
            "horizon: 1",
            "adjustment_length: 1",
            f"loss: {loss}",
            "covariates: [" + ", ".join(names) + "]",
            "target:",
            f"  name: {target.name}",
            f"  returns: {dump_returns(target.name, target.returns)}",
            f"  covariates: {dump_covs(target.name, target.profile_covariates)}",
            f"  t_star: {target.t_star}",
            "donors:",
            *donor_blocks,
            "ground_truth:",
            f"  value: {ground_truth!r}",
        ]
    )
    config_path = tmp_path / "bundle.yaml"
    config_path.write_text(config + "\n")
    return config_path
