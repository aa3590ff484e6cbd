//! Canonical registry of the 307 dysphonia measures: families, names, and
//! their fixed order. The registry is versioned; results are comparable only
//! within a registry version.

use std::sync::OnceLock;

pub const REGISTRY_VERSION: &str = "v1";
pub const N_FEATURES: usize = 307;

/// Feature family, in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Family {
    Jitter,
    Shimmer,
    HnrNhr,
    Gq,
    Rpde,
    Dfa,
    Ppe,
    Gne,
    Vfer,
    EmdEr,
    Mfcc,
    F0Related,
    Wavelet,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Jitter => "jitter",
            Family::Shimmer => "shimmer",
            Family::HnrNhr => "hnr_nhr",
            Family::Gq => "gq",
            Family::Rpde => "rpde",
            Family::Dfa => "dfa",
            Family::Ppe => "ppe",
            Family::Gne => "gne",
            Family::Vfer => "vfer",
            Family::EmdEr => "emd_er",
            Family::Mfcc => "mfcc",
            Family::F0Related => "f0",
            Family::Wavelet => "wavelet",
        }
    }

    /// Number of measures in the family.
    pub fn count(&self) -> usize {
        match self {
            Family::Jitter => 28,
            Family::Shimmer => 21,
            Family::HnrNhr => 4,
            Family::Gq => 3,
            Family::Rpde => 1,
            Family::Dfa => 1,
            Family::Ppe => 1,
            Family::Gne => 6,
            Family::Vfer => 9,
            Family::EmdEr => 6,
            Family::Mfcc => 42,
            Family::F0Related => 3,
            Family::Wavelet => 182,
        }
    }

    pub const ALL: [Family; 13] = [
        Family::Jitter,
        Family::Shimmer,
        Family::HnrNhr,
        Family::Gq,
        Family::Rpde,
        Family::Dfa,
        Family::Ppe,
        Family::Gne,
        Family::Vfer,
        Family::EmdEr,
        Family::Mfcc,
        Family::F0Related,
        Family::Wavelet,
    ];

    /// Index range [start, end) of this family in the feature vector.
    pub fn range(&self) -> std::ops::Range<usize> {
        let mut start = 0;
        for f in Family::ALL {
            if f == *self {
                return start..start + f.count();
            }
            start += f.count();
        }
        unreachable!()
    }
}

fn ordinal(k: usize) -> String {
    let suffix = match k % 10 {
        1 if k % 100 != 11 => "st",
        2 if k % 100 != 12 => "nd",
        3 if k % 100 != 13 => "rd",
        _ => "th",
    };
    format!("{k}{suffix}")
}

fn jitter_names() -> Vec<String> {
    let mut n = Vec::with_capacity(28);
    // Classic five on cycle periods, then on the frame pitch-period sequence
    // ("pitch" = 1/F0 per voiced frame).
    for dom in ["cycles", "pitch"] {
        for v in ["local", "absolute", "RAP", "PPQ5", "DDP"] {
            n.push(format!("Jitter {v} ({dom})"));
        }
    }
    n.push("Jitter mean TKEO pitch".into());
    n.push("Jitter std TKEO pitch".into());
    for p in [5, 25, 50, 75, 95] {
        n.push(format!("Jitter (TKEO {p}% pitch)"));
    }
    for p in [5, 25, 50, 75, 95] {
        n.push(format!("Jitter (TKEO {p}% F0)"));
    }
    n.push("Jitter pitch PQ5".into());
    n.push("Jitter pitch PQ11".into());
    n.push("Jitter F0 abs diff mean".into());
    n.push("Jitter F0 abs diff std".into());
    n.push("Jitter range-normalized (cycles)".into());
    n.push("Jitter range-normalized F0".into());
    n
}

fn shimmer_names() -> Vec<String> {
    let mut n = Vec::with_capacity(21);
    for v in ["local", "local dB", "APQ3", "APQ5", "APQ11", "DDA"] {
        n.push(format!("Shimmer {v}"));
    }
    n.push("Shimmer mean TKEO".into());
    n.push("Shimmer std TKEO".into());
    for p in [5, 25, 50, 75, 95] {
        n.push(format!("Shimmer (TKEO {p}%)"));
    }
    for p in [5, 25, 50, 75, 95] {
        n.push(format!("Shimmer (abs diff {p}%)"));
    }
    n.push("Shimmer amplitude range ratio".into());
    n.push("Shimmer amplitude CoV".into());
    n.push("Shimmer dB std".into());
    n
}

fn mfcc_names() -> Vec<String> {
    let mut n = Vec::with_capacity(42);
    for prefix in ["", "Delta ", "Delta-delta "] {
        n.push(format!("{prefix}log energy mean"));
        for c in 0..=12 {
            n.push(format!("{prefix}MFCC {c} mean"));
        }
    }
    n
}

fn wavelet_names() -> Vec<String> {
    let mut n = Vec::with_capacity(182);
    for sig in ["F0", "log F0"] {
        for level in 1..=10 {
            for stat in [
                "energy",
                "Shannon entropy",
                "log entropy",
                "TKEO mean",
                "TKEO std",
                "max",
                "min",
            ] {
                n.push(format!("{} detail wavelet {stat} of {sig}", ordinal(level)));
            }
        }
        for level in 1..=3 {
            for stat in [
                "energy",
                "Shannon entropy",
                "log entropy",
                "TKEO mean",
                "TKEO std",
                "max",
                "min",
            ] {
                n.push(format!("{} approx wavelet {stat} of {sig}", ordinal(level)));
            }
        }
    }
    n
}

fn build_names() -> Vec<String> {
    let mut names = Vec::with_capacity(N_FEATURES);
    names.extend(jitter_names());
    names.extend(shimmer_names());
    names.extend(["Mean HNR", "Std HNR", "Mean NHR", "Std NHR"].map(String::from));
    names.extend(
        [
            "GQ range (prc5-prc95)",
            "GQ std above-median",
            "GQ std below-median",
        ]
        .map(String::from),
    );
    names.push("RPDE".into());
    names.push("DFA".into());
    names.push("PPE".into());
    names.extend(
        [
            "GNE mean",
            "GNE std",
            "GNE SNR energy",
            "GNE SNR TKEO",
            "GNE NSR energy",
            "GNE NSR TKEO",
        ]
        .map(String::from),
    );
    names.extend(
        [
            "VFER mean",
            "VFER std",
            "VFER entropy",
            "VFER SNR energy",
            "VFER SNR TKEO",
            "VFER SNR entropy",
            "VFER NSR energy",
            "VFER NSR TKEO",
            "VFER NSR entropy",
        ]
        .map(String::from),
    );
    names.extend(
        [
            "EMD-ER SNR energy",
            "EMD-ER SNR TKEO",
            "EMD-ER SNR entropy",
            "EMD-ER NSR energy",
            "EMD-ER NSR TKEO",
            "EMD-ER NSR entropy",
        ]
        .map(String::from),
    );
    names.extend(mfcc_names());
    names.extend(
        [
            "Diff F0 expected",
            "F0 std",
            "F0 range (prc5-prc95)",
        ]
        .map(String::from),
    );
    names.extend(wavelet_names());
    names
}

/// Canonical feature names in registry order.
pub fn feature_names() -> &'static [String] {
    static NAMES: OnceLock<Vec<String>> = OnceLock::new();
    NAMES.get_or_init(build_names)
}

/// Family of the feature at `index`.
pub fn family_of(index: usize) -> Family {
    let mut start = 0;
    for f in Family::ALL {
        if index < start + f.count() {
            return f;
        }
        start += f.count();
    }
    panic!("feature index {index} out of range");
}

/// Render the shipped registry file: `index,family,name`, one line per
/// feature, preceded by a version comment.
pub fn registry_csv() -> String {
    let mut out = format!("# feature registry {REGISTRY_VERSION}\n");
    for (i, name) in feature_names().iter().enumerate() {
        out.push_str(&format!("{i},{},{name}\n", family_of(i).name()));
    }
    out
}
