use std::sync::OnceLock;

use proptest::collection::vec;
use proptest::prelude::*;

use apfree::analysis::{lz78_phrase_estimate, recurrence_gap};
use apfree::avoider::scan_violations;
use apfree::bits::BitString;
use apfree::forbidden::{parse_family, write_family, Alpha, ForbiddenFamily};
use apfree::lll::{check_condition, make_plan, LllPlan};
use apfree::scaffold::{decompose_window, fresh_count, PeriodLadder};

fn bits(max: usize) -> impl Strategy<Value = Vec<u8>> {
    vec(0u8..2, 0..max)
}

fn family() -> impl Strategy<Value = ForbiddenFamily> {
    vec((1usize..7, any::<u64>()), 0..12).prop_map(|words| {
        let mut fam = ForbiddenFamily::new(Alpha::new(1, 2).unwrap());
        for (len, value) in words {
            fam.insert(len, BitString::from_u64(value & ((1 << len) - 1), len)).unwrap();
        }
        fam
    })
}

fn ladder() -> impl Strategy<Value = PeriodLadder> {
    (1u64..5, vec(2u64..6, 1..3)).prop_map(|(n0, radices)| {
        let mut periods = vec![n0];
        for r in radices {
            let last = *periods.last().unwrap();
            periods.push(last * r);
        }
        PeriodLadder::new(periods).unwrap()
    })
}

fn plans() -> &'static [LllPlan] {
    static PLANS: OnceLock<Vec<LllPlan>> = OnceLock::new();
    PLANS.get_or_init(|| (1..8).map(|num| make_plan(Alpha::new(num, 8).unwrap()).unwrap()).collect())
}

proptest! {
    #[test]
    fn lz78_is_prefix_monotone(x in bits(200)) {
        for i in 0..x.len() {
            let (a, b) = (lz78_phrase_estimate(&x[..i]), lz78_phrase_estimate(&x[..i + 1]));
            prop_assert!(a <= b && b <= a + 1);
        }
        prop_assert!(lz78_phrase_estimate(&x) <= x.len());
    }

    #[test]
    fn plan_condition_holds_and_repeats(num in 1u32..8, extra in 0u64..5000) {
        let plan = &plans()[num as usize - 1];
        let len = plan.min_len + extra;
        let first = check_condition(plan, len).unwrap();
        prop_assert!(first);
        prop_assert_eq!(first, check_condition(plan, len).unwrap());
    }

    #[test]
    fn scanner_agrees_with_naive_search(x in bits(120), fam in family(), min_len in 1usize..5) {
        let x = BitString::from_bits(x);
        let mut naive = Vec::new();
        for start in 0..x.len() {
            for len in min_len..=(x.len() - start) {
                if fam.contains_at(len, &x.slice(start, start + len)) {
                    naive.push((start, len));
                }
            }
        }
        prop_assert_eq!(scan_violations(&x, &fam, min_len), naive);
    }

    #[test]
    fn family_text_round_trips(fam in family()) {
        let parsed = parse_family(&write_family(&fam)).unwrap();
        prop_assert_eq!(parsed.family, fam);
    }

    #[test]
    fn recurrence_window_contains_pattern(x in bits(300), pattern in bits(4)) {
        prop_assume!(!pattern.is_empty());
        let (x, pattern) = (BitString::from_bits(x), BitString::from_bits(pattern));
        let report = recurrence_gap(&x, &pattern);
        if let Some(k) = report.window_k {
            let first = report.occurrences[0];
            let last = *report.occurrences.last().unwrap() + pattern.len();
            for start in first..=last - k {
                prop_assert!(report.occurrences.iter().any(|&o| o >= start && o + pattern.len() <= start + k));
            }
        }
    }

    #[test]
    fn fresh_count_steps_by_primaries(ladder in ladder(), n in 0u64..2000) {
        let step = fresh_count(&ladder, n + 1) - fresh_count(&ladder, n);
        prop_assert_eq!(step, ladder.is_primary(n) as u64);
    }

    #[test]
    fn window_decomposition_conserves_length(ladder in ladder(), m in 0u64..5000, k_frac in 0.0f64..1.0) {
        let k = 1 + (k_frac * (ladder.top() - 1) as f64) as u64;
        let dec = decompose_window(m, k, &ladder).unwrap();
        prop_assert_eq!(dec.small_rank_count + dec.total_len, k);
        prop_assert!(dec.intervals.len() <= 3);
        prop_assert!(dec.density_bound_holds);
        let sorted: Vec<_> = dec.intervals.windows(2).map(|w| w[0].end <= w[1].start).collect();
        prop_assert!(sorted.into_iter().all(|b| b));
    }
}
