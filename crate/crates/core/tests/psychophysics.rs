use hueshift_core::colorspace::{srgb_decode, Jnd, SRgb8, JND_DELTA_E};
use hueshift_core::cvd::CvdType;
use hueshift_core::par::Exec;
use hueshift_core::psychophysics::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gray() -> hueshift_core::colorspace::LinearRgb {
    srgb_decode(SRgb8::new(136, 136, 136))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    0.5 * (v[v.len() / 2 - 1] + v[v.len() / 2])
}

fn thresholds(o: &SimulatedObserver, line: SamplingLine, shift: bool, seeds: u64) -> Vec<f64> {
    (0..seeds)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            run_sequence(o, gray(), line, Direction::Positive, shift, &mut rng).unwrap().threshold_delta_e
        })
        .collect()
}

#[test]
fn ideal_observer_lands_near_one_jnd() {
    let o = SimulatedObserver::new(CvdType::Protan, Jnd(1.0), 0.0).unwrap();
    for t in thresholds(&o, SamplingLine::OrthogonalProtan, false, 100) {
        let jnd = t / JND_DELTA_E;
        assert!((0.5..=2.0).contains(&jnd), "{jnd}");
    }
}

#[test]
fn convergence_tracks_tau() {
    for tau in [0.5, 1.0, 2.0, 3.0] {
        let o = SimulatedObserver::new(CvdType::Protan, Jnd(tau), 0.0).unwrap();
        let m = median(thresholds(&o, SamplingLine::OrthogonalProtan, false, 100)) / JND_DELTA_E;
        assert!((0.8 * tau..=1.5 * tau).contains(&m), "tau {tau}: median {m}");
    }
}

#[test]
fn blind_direction_rises_to_the_gamut_limit() {
    let o = SimulatedObserver::new(CvdType::Deutan, Jnd(1.0), 0.0).unwrap();
    let path = StimulusPath::new(gray(), SamplingLine::Deutan, Direction::Positive).unwrap();
    let max = path.max_distance();
    let blind = median(thresholds(&o, SamplingLine::Deutan, false, 20));
    assert!(blind > 0.6 * max, "median {blind} vs max {max}");

    let shifted = median(thresholds(&o, SamplingLine::Deutan, true, 20));
    let reference = median(thresholds(&o, SamplingLine::OrthogonalProtan, false, 20));
    assert!(shifted <= 3.0 * reference, "{shifted} vs {reference}");
}

#[test]
fn monotone_response() {
    let base = StaircaseState::new(gray(), [1.0, 0.0, 0.0], 30.0);
    let mut s = base.clone();
    for _ in 0..40 {
        s = staircase_step(&s, true).unwrap();
    }
    assert_eq!(s.current_distance, 0.0);
    let mut s = base;
    for _ in 0..40 {
        s = staircase_step(&s, false).unwrap();
    }
    assert_eq!(s.current_distance, 30.0);
    assert!(!s.finished);
}

#[test]
fn lapsing_observer_is_at_chance() {
    let o = SimulatedObserver::new(CvdType::Protan, Jnd(1.0), 1.0).unwrap();
    let path = StimulusPath::new(gray(), SamplingLine::Tritan, Direction::Positive).unwrap();
    let odd = path.color_at(20.0);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 10_000;
    let hits = (0..n)
        .filter(|_| {
            let l = TrialLayout::random(gray(), odd, &mut rng);
            observer_decide(&o, &l, true, &mut rng) == l.odd_position
        })
        .count();
    let rate = hits as f64 / n as f64;
    assert!((0.22..=0.28).contains(&rate), "{rate}");
}

#[test]
fn study_is_deterministic_and_executor_independent() {
    let o = SimulatedObserver::new(CvdType::Deutan, Jnd(1.0), 0.05).unwrap();
    let cfg = make_study_config(7);
    let a = run_study_with(&o, &cfg, Exec::Parallel).unwrap();
    let b = run_study_with(&o, &cfg, Exec::Sequential).unwrap();
    assert_eq!(a.len(), 64);
    assert_eq!(a, b);
    assert_eq!(a, run_study(&o, &make_study_config(7)).unwrap());
    assert_ne!(a, run_study(&o, &make_study_config(8)).unwrap());
}

#[test]
fn deutan_shift_shrinks_every_ellipse() {
    let o = SimulatedObserver::new(CvdType::Deutan, Jnd(1.0), 0.0).unwrap();
    let summaries = summarize_study(&run_study(&o, &make_study_config(7)).unwrap());
    assert_eq!(summaries.len(), 8);
    for b in STUDY_BASES {
        let area = |p| summaries.iter().find(|s| s.base_name == b.name && s.phase == p).unwrap().area.unwrap();
        assert!(area(Phase::WithShift) < area(Phase::WithoutShift), "{}", b.name);
    }
    assert!(summaries.iter().all(|s| s.points.len() == 8));
}
