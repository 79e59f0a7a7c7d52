use rug::ops::Pow;
use rug::Integer;
use tatesha_core::bsd;
use tatesha_core::equidist::{self, AngleSample};
use tatesha_core::ffield::FieldParams;
use tatesha_core::level::{Level, LevelConfig, ANGLE_RESOLUTION, DEFAULT_PRECISION};
use tatesha_core::lfun::{self, IntPoly};
use tatesha_core::oracle;

// Frozen from a brute-force complex-sum computation written independently
// of this crate.
const L_7_1: &[&str] = &[
    "1",
    "-42",
    "917",
    "-14000",
    "170324",
    "-1746654",
    "15696072",
    "-130263168",
    "1056675298",
    "-8578052700",
    "69068820289",
    "-537247923268",
    "3915263541959",
    "-26325148240132",
    "165834237513889",
    "-1009199322102300",
    "6091522814585698",
    "-36796120816328832",
    "217253840479574472",
    "-1184621043083997246",
    "5660365666336720724",
    "-22797790370746286000",
    "73169508194910204917",
    "-164212484040485498058",
    "191581231380566414401",
];
const L_11_1: &[&str] = &[
    "1",
    "0",
    "-1342",
    "0",
    "870595",
    "0",
    "-365103948",
    "0",
    "112085712805",
    "0",
    "-27167198119226",
    "0",
    "5494158624304471",
    "0",
    "-966233258531600312",
    "0",
    "151642657628900678185",
    "0",
    "-21452039391655905924694",
    "0",
    "2735646942516648989340171",
    "0",
    "-314079308733234118643444854",
    "0",
    "32505950401197262635877710985",
    "0",
    "-3032453877107172691272537136952",
    "0",
    "252455104614405692005758143431831",
    "0",
    "-18276732397041145312674788454998426",
    "0",
    "1104014307906596068595003064558824005",
    "0",
    "-52651617013310618806131511741074091788",
    "0",
    "1838154846562020575319584912238886172995",
    "0",
    "-41484817275112442677073639641302962410462",
    "0",
    "452592555681759518058893560348969204658401",
];
const L_13_1: &[&str] = &[
    "1",
    "-26",
    "1339",
    "-35412",
    "1059799",
    "-24990030",
    "593410883",
    "-12440354316",
    "255028107126",
    "-4851619725394",
    "89467689798110",
    "-1570028264097358",
    "26728769124429099",
    "-439220108746185702",
    "7028916267587411483",
    "-109521808164999264372",
    "1669472256659461624825",
    "-24897902870834794397610",
    "364583591691704131315088",
    "-5232566403474330569747072",
    "73891785515521969462765571",
    "-1022660661740854937810757774",
    "13934903019747988804166867499",
    "-185943908981073967877220707718",
    "2443393335444802767486720695955",
    "-31424520617801500571250299604342",
    "397994765147022308235809902638939",
    "-4936187686036714281519405920363166",
    "60275799474554092841201741885806691",
    "-721353712882717246130208251303616128",
    "8494099553493179540221695714083293328",
    "-98032414817059454298123106979360299290",
    "1110894568151730284685473090006045152825",
    "-12316319507309202256181721843771807299988",
    "133584299042169111116716828422438663151883",
    "-1410704221250558526269206850125987207738038",
    "14508396471898803750472337761978212561809739",
    "-144023921163207284258824876121505348191404222",
    "1387011582949543335715396861364103674036365310",
    "-12711222545178422248544705152299770424827746306",
    "112921157515651540964989031315175434773640012406",
    "-930907926352297326497073288730495430105110252524",
    "7504403717986697383513921225492196337604486406003",
    "-53408965392259664909657400176824968948208243659870",
    "382787368051338341865084216203414656565511249222199",
    "-2161579696608833258192690522116938258379506355837428",
    "13813002121464743217826785579474869406612359447893579",
    "-45328104049078477743936441998665105431407548479495434",
    "294632676319010105335586872991323185304149065116720321",
];

const SPECIAL_7_1: &str = "28561/117649";
const SPECIAL_11_1: &str = "279841/25937424601";
const SPECIAL_13_1: &str = "1592368242351121/23298085122481";

fn level(q: u64, a: u32) -> Level {
    Level::new(LevelConfig::new(q, a)).unwrap()
}

fn frozen(c: &[&str]) -> IntPoly {
    IntPoly::new(c.iter().map(|s| s.parse::<Integer>().unwrap()).collect())
}

#[test]
fn l_polynomials_match_frozen_values() {
    for (q, coeffs, special) in [(7, L_7_1, SPECIAL_7_1), (11, L_11_1, SPECIAL_11_1), (13, L_13_1, SPECIAL_13_1)] {
        let l = lfun::l_polynomial(&level(q, 1)).unwrap();
        assert_eq!(l, frozen(coeffs), "q = {q}");
        assert_eq!(lfun::special_value(&l, q).unwrap().to_string(), special);
    }
}

#[test]
fn leading_coefficient_is_q_to_the_degree() {
    for (q, a) in [(7, 1), (7, 2), (11, 1), (13, 1)] {
        let l = lfun::l_polynomial(&level(q, a)).unwrap();
        let d = lfun::expected_degree(q, a);
        assert_eq!(l.degree(), d);
        assert_eq!(l.coeffs()[d].clone().abs(), Integer::from(q).pow(d as u32));
        assert_eq!(lfun::verify_functional_equation(&l, q).unwrap(), 1);
    }
}

#[test]
fn json_round_trip() {
    let l = frozen(L_13_1);
    let j = serde_json::to_string(&l.to_json(13, 1)).unwrap();
    let back: lfun::LPolynomialJson = serde_json::from_str(&j).unwrap();
    assert_eq!(IntPoly::from_json(&back).unwrap(), l);
}

#[test]
fn point_counts_small_cases() {
    let p7 = FieldParams::new(7).unwrap();
    // t^7 - t vanishes on F_7 so every affine point has u = 0
    assert_eq!(oracle::count_x(p7, 1, 1, 1000).unwrap().count, 8);
    let lv = level(7, 2);
    let c = oracle::point_count_checks(&lv, 3, 10_000_000, DEFAULT_PRECISION).unwrap();
    assert!(c.iter().all(|r| r.counted.to_string() == r.predicted && r.rounding_error < 1e-30));
}

#[test]
fn direct_sums_cover_every_small_orbit() {
    let r = oracle::direct_sums_check(&level(7, 1), 1_000_000).unwrap();
    assert_eq!((r.checked, r.skipped), (12, 0));
}

#[test]
fn squarefree_for_several_levels() {
    for (q, a) in [(7, 1), (7, 2), (11, 1), (13, 1)] {
        assert!(oracle::squarefree_check(FieldParams::new(q).unwrap(), a, 3).unwrap().squarefree);
    }
}

#[test]
fn sha_ledger_q7_a1() {
    let lv = level(7, 1);
    let l = frozen(L_7_1);
    let v = lfun::special_value(&l, 7).unwrap();
    let r = bsd::sha_report(&lv, &l, &v).unwrap();
    // L* q^{h-2} with h = 8
    assert_eq!(r.candidates[0].value, 28561);
    assert_eq!(r.torsion.running_gcd, vec![117, 117, 117, 9, 9]);
    assert_eq!(r.torsion.bound, 9);
    assert!(r.torsion.stabilized);
    assert_eq!(r.dim_sha.valuation_formula, "0");
    assert_eq!(r.dim_sha.newton_polygon, "0");
}

#[test]
fn no_candidate_without_integrality() {
    let inv = bsd::invariants(7, 1);
    let bad = tatesha_core::cyclo::BigRational::from((1, 7u32.pow(9)));
    assert!(bsd::sha_candidates(&bad, &inv, 1).is_err());
}

#[test]
fn angle_statistics_q7_a1() {
    let lv = level(7, 1);
    let num = lv.numerics_resolved(DEFAULT_PRECISION, ANGLE_RESOLUTION).unwrap();
    let s = AngleSample::new(&lv, &num).unwrap();
    assert_eq!(s.angles.len(), 6);
    let row = equidist::discrepancy_row(&s).unwrap();
    assert!((row.discrepancy - 0.44054756435802).abs() < 1e-12);
    let gaps = equidist::min_angle_gap(&lv, &num).unwrap();
    assert_eq!(gaps.len(), 1);
    assert!((gaps[0].min_gap - 0.39825856309176).abs() < 1e-12);
}

#[test]
fn budget_is_enforced() {
    let p = FieldParams::new(13).unwrap();
    assert!(oracle::count_y(p, 1, 4, 10_000).is_err());
    assert!(oracle::count_y(p, 1, 3, 10_000).is_ok());
}
