//! Bundled subdesigns in the `.blocks` format, embedded at compile time.
//!
//! These are the hand-sized designs exercised throughout the tests and the
//! guide: the smallest linked block design, the 15-treatment linked block
//! design with its trimmed and augmented variants, a nearly linked block
//! design, the dual of the Clatworthy PBIB design R19 with its augmented
//! variant, and the 4x4 square lattice LS28 with its augmented variant.

use crate::model::BlockDesign;

macro_rules! fixture {
    ($fn_name:ident, $name:literal, $doc:literal) => {
        #[doc = $doc]
        pub fn $fn_name() -> BlockDesign {
            BlockDesign::parse(include_str!(concat!("../fixtures/", $name, ".blocks")))
                .expect("bundled fixture parses")
        }
    };
}

fixture!(lb_1_3, "lb-1-3", "Smallest linked block design: u = 3, b = 3.");
fixture!(lb15_6, "lb15-6", "Linked block design with u = 15, b = 6.");
fixture!(
    lb15_trim13,
    "lb15-trim13",
    "lb15_6 minus treatments 1 and 15: u = 13, b = 6."
);
fixture!(
    lb15_aug17,
    "lb15-aug17",
    "lb15_6 plus treatments 16 and 17: u = 17, b = 6."
);
fixture!(
    near_lb_8_4,
    "near-lb-8-4",
    "Nearly linked block design: u = 8, b = 4."
);
fixture!(dual_r19, "dual-r19", "Dual of R19: u = 18, b = 6.");
fixture!(
    dual_r19_aug20,
    "dual-r19-aug20",
    "dual_r19 plus treatments 19 and 20: u = 20, b = 6."
);
fixture!(ls28, "ls28", "4x4 square lattice LS28: u = 16, b = 8.");
fixture!(
    ls28_aug20,
    "ls28-aug20",
    "ls28 plus treatments 17-20: u = 20, b = 8."
);

/// All bundled fixtures as (name, design) pairs, each with the smallest valid
/// full-design block size to pair it with in sweeps.
pub fn all() -> Vec<(&'static str, BlockDesign)> {
    vec![
        ("lb-1-3", lb_1_3()),
        ("lb15-6", lb15_6()),
        ("lb15-trim13", lb15_trim13()),
        ("lb15-aug17", lb15_aug17()),
        ("near-lb-8-4", near_lb_8_4()),
        ("dual-r19", dual_r19()),
        ("dual-r19-aug20", dual_r19_aug20()),
        ("ls28", ls28()),
        ("ls28-aug20", ls28_aug20()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{linked_block, modify, square_lattice, Edit};
    use crate::model::validate_design;

    #[test]
    fn fixtures_parse_and_validate() {
        for (name, d) in all() {
            assert!(d.is_connected(), "{name} must be connected");
            let k = d.k_max() + 1;
            let report = validate_design(&d, k);
            assert!(report.valid, "{name} at k = {k}: {report}");
        }
    }

    #[test]
    fn fixtures_match_their_constructions() {
        assert_eq!(lb_1_3().blocks(), linked_block(1, 3).unwrap().blocks());
        assert_eq!(lb15_6().blocks(), linked_block(1, 6).unwrap().blocks());
        assert_eq!(ls28().blocks(), square_lattice(4).unwrap().blocks());

        // The trimmed variant: parse-normalization maps 2..14 to 1..13, so
        // compare against the trimmed construction normalized the same way.
        let trimmed = modify(
            &linked_block(1, 6).unwrap(),
            &[
                Edit::DeleteTreatment { label: 1 },
                Edit::DeleteTreatment { label: 15 },
            ],
        )
        .unwrap();
        assert_eq!(lb15_trim13().incidence(), trimmed.normalize().incidence());

        let augmented = modify(
            &linked_block(1, 6).unwrap(),
            &[
                Edit::AddTreatment { label: 16, blocks: vec![1, 2] },
                Edit::AddTreatment { label: 17, blocks: vec![5, 6] },
            ],
        )
        .unwrap();
        assert_eq!(lb15_aug17().blocks(), augmented.blocks());

        let ls_augmented = modify(
            &square_lattice(4).unwrap(),
            &[
                Edit::AddTreatment { label: 17, blocks: vec![1, 2] },
                Edit::AddTreatment { label: 18, blocks: vec![3, 4] },
                Edit::AddTreatment { label: 19, blocks: vec![5, 6] },
                Edit::AddTreatment { label: 20, blocks: vec![7, 8] },
            ],
        )
        .unwrap();
        assert_eq!(ls28_aug20().blocks(), ls_augmented.blocks());

        let r19_augmented = modify(
            &dual_r19(),
            &[
                Edit::AddTreatment { label: 19, blocks: vec![1, 2] },
                Edit::AddTreatment { label: 20, blocks: vec![5, 6] },
            ],
        )
        .unwrap();
        assert_eq!(dual_r19_aug20().blocks(), r19_augmented.blocks());
    }

    #[test]
    fn fixture_parameters() {
        let params: Vec<(usize, usize)> =
            all().iter().map(|(_, d)| (d.num_treatments(), d.num_blocks())).collect();
        assert_eq!(
            params,
            vec![
                (3, 3),
                (15, 6),
                (13, 6),
                (17, 6),
                (8, 4),
                (18, 6),
                (20, 6),
                (16, 8),
                (20, 8),
            ]
        );
    }
}
