//! Byte-for-byte golden check on a rendered stem plot. The fixture under
//! `tests/golden/` was generated by this same pipeline and reviewed by hand;
//! any drift in synthesis, classification, or rendering shows up as a diff.
//! Regenerate with `BLESS=1 cargo test -p nfx --test golden` after an
//! intentional change, then review the new file before committing it.

use std::path::Path;

use nfx::{
    classify_series, generate, render_stemplot, GrowthLaw, ProxyPair, StemPlotSpec, SynthSpec,
    UserProxy, ValueProxy,
};

#[test]
fn metcalfe_stemplot_matches_golden_bytes() {
    let spec = SynthSpec {
        law: GrowthLaw::Metcalfe,
        days: 183,
        u0: 1000.0,
        growth: 1.0,
        noise_sigma: 0.05,
        seed: 7,
    };
    let series = generate(&spec).unwrap();
    let pair = ProxyPair::new(ValueProxy::TokenPrice, UserProxy::NonZeroBalanceAddresses);
    let days = classify_series(&series, pair).unwrap();
    let plot = StemPlotSpec {
        title: "SYNTH price:balcnt".to_string(),
        ..StemPlotSpec::default()
    };
    let got = render_stemplot(&days, &plot).unwrap();

    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/metcalfe_183.svg");
    if std::env::var_os("BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).unwrap();
    assert_eq!(got, want, "rendered SVG drifted from the reviewed fixture");
}
