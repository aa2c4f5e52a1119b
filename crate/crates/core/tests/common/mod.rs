use ep3_optomech::SystemParams;

/// Default device at `kappa/gamma`, `J/gamma`, `Delta/omega_m` and drive power (W).
pub fn point(kappa: f64, j: f64, delta: f64, p_in: f64) -> SystemParams {
    let base = SystemParams::default();
    let (g, wm) = (base.gamma(), base.omega_m());
    base.with_raw(|r| {
        r.kappa_rad_s = kappa * g;
        r.j_rad_s = j * g;
        r.delta_rad_s = delta * wm;
        r.p_in_w = p_in;
    })
    .expect("valid point")
}
