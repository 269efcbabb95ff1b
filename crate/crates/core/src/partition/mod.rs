//! Multiscale partition of the `δ`-neighborhood of a surface of revolution
//! into essentially flat boxes.
//!
//! Nondegenerate intervals get a `δ^{1/2} × δ^{1/2}` grid, cones get full
//! length plates, and every degenerate circle gets dyadic annuli `U_k`, each
//! cut into first-stage sectors which are refined on a `(δ/s^n)^{1/2}` grid.

pub mod annuli;
pub mod caps;
pub mod flatness;
pub mod rescale;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BoxFrame;
use crate::profile::{Interval, Profile, ProfileSpec};
use crate::structure::{analyze_structure_with, DecomposeOptions, DegeneracyCase, LeadingModel, ZeroPoint};
use crate::surface::{Cylinder, Revolution, Surface};

pub use annuli::{dyadic_annuli, dyadic_annuli_at, split, Annulus, Side};
pub use caps::{
    first_stage_caps, first_stage_caps_canonical, first_stage_dims, partition_nondegenerate, plate_footprints,
    second_stage_refine, SecondStage,
};
pub use flatness::{flatness_check, flatness_check_scaled, frame_for_patch, FlatnessReport, DEFAULT_CONTAINMENT};
pub use rescale::{
    containment_certificate, rescale_map, rescaled_curvatures, rescaling_certificates, CertificateRow,
    ContainmentReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PieceCase {
    Nondegenerate,
    Cone,
    QuasiTorus,
    PerturbedCone,
    /// Square `δ^{1/2}` caps on a cone; used only in experiments.
    ConeSquare,
}

/// Where a footprint sits in the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub case: PieceCase,
    pub piece: u32,
    pub side: Side,
    /// Annulus index for degenerate pieces, row index for grids.
    pub k: u32,
    pub first: u32,
    /// 0 for unrefined caps, otherwise 1-based subcap index.
    pub second: u32,
}

impl Stage {
    pub fn new(case: PieceCase, piece: u32) -> Self {
        Self {
            case,
            piece,
            side: Side::Full,
            k: 0,
            first: 0,
            second: 0,
        }
    }
}

/// Half-open parameter rectangle `[α1, α2) × [r1, r2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapFootprint {
    pub alpha1: f64,
    pub alpha2: f64,
    pub r1: f64,
    pub r2: f64,
    /// Order of the governing zero; 0 for nondegenerate pieces.
    pub n: u32,
    #[serde(flatten)]
    pub stage: Stage,
}

impl CapFootprint {
    pub fn contains(&self, alpha: f64, r: f64) -> bool {
        alpha >= self.alpha1 && alpha < self.alpha2 && r >= self.r1 && r < self.r2
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.alpha1 + self.alpha2), 0.5 * (self.r1 + self.r2))
    }
}

mod frame_json {
    use super::BoxFrame;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Flat {
        center: [f64; 3],
        axes: Vec<f64>,
        halfwidths: [f64; 3],
    }

    pub fn serialize<S: Serializer>(f: &BoxFrame, s: S) -> Result<S::Ok, S::Error> {
        Flat {
            center: f.center,
            axes: f.axes_flat().to_vec(),
            halfwidths: f.halfwidths,
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BoxFrame, D::Error> {
        let flat = Flat::deserialize(d)?;
        if flat.axes.len() != 9 {
            return Err(serde::de::Error::custom("frame axes must have 9 entries"));
        }
        let a = &flat.axes;
        Ok(BoxFrame {
            center: flat.center,
            axes: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
            halfwidths: flat.halfwidths,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxRecord {
    pub footprint: CapFootprint,
    #[serde(with = "frame_json")]
    pub frame: BoxFrame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceInfo {
    pub index: u32,
    pub case: PieceCase,
    pub interval: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<ZeroPoint>,
    /// `δ/|c_n|`, the neighborhood width after normalizing the leading coefficient.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_eff: Option<f64>,
}

/// Boxes produced for one `(piece, side, k)` and the closed-form count they should match.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub piece: u32,
    pub case: PieceCase,
    pub side: Side,
    pub k: u32,
    pub first_stage: usize,
    pub per_cap: usize,
    pub boxes: usize,
    pub predicted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionManifest {
    pub profile: ProfileSpec,
    pub delta: f64,
    pub pieces: Vec<PieceInfo>,
    pub boxes: Vec<BoxRecord>,
    pub counts: Vec<StageCount>,
    pub log: Vec<String>,
}

impl PartitionManifest {
    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn footprints(&self) -> impl Iterator<Item = &CapFootprint> {
        self.boxes.iter().map(|b| &b.footprint)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PartitionOptions {
    pub decompose: DecomposeOptions,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("delta {delta} must lie in (0,1)")))
    }
}

fn attach_frames<S: Surface + ?Sized>(surf: &S, fps: Vec<CapFootprint>, delta: f64) -> Vec<BoxRecord> {
    fps.into_par_iter()
        .map(|fp| BoxRecord {
            frame: frame_for_patch(surf, &fp, delta),
            footprint: fp,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlateVariant {
    Cone,
    Cylinder,
}

/// Plates of angular width `δ^{1/2}` on the cone `γ(r) = r` over `[1/2, 2]`
/// or on the unit cylinder over heights `[−1, 1]`.
pub fn partition_cone_plates(delta: f64, variant: PlateVariant) -> Result<Vec<BoxRecord>> {
    check_delta(delta)?;
    Ok(match variant {
        PlateVariant::Cone => {
            let p = ProfileSpec::named("cone").with_params(&[1.0]).build()?;
            let fps = plate_footprints(p.domain(), delta, 0);
            attach_frames(&Revolution::new(&p), fps, delta)
        }
        PlateVariant::Cylinder => {
            let fps = plate_footprints(Interval::new(-1.0, 1.0), delta, 0);
            attach_frames(&Cylinder, fps, delta)
        }
    })
}

/// Square `δ^{1/2}` caps on a cone profile (not flat along the ruling).
pub fn partition_cone_square(p: &Profile, delta: f64) -> Result<PartitionManifest> {
    check_delta(delta)?;
    let d = p.domain();
    let fps = caps::square_grid(p, d, delta, PieceCase::ConeSquare, 0);
    let predicted = TAU * d.mid() * d.len() / delta;
    let boxes = attach_frames(&Revolution::new(p), fps, delta);
    Ok(PartitionManifest {
        profile: p.spec(),
        delta,
        pieces: vec![PieceInfo {
            index: 0,
            case: PieceCase::ConeSquare,
            interval: d,
            zero: None,
            delta_eff: None,
        }],
        counts: vec![StageCount {
            piece: 0,
            case: PieceCase::ConeSquare,
            side: Side::Full,
            k: 0,
            first_stage: boxes.len(),
            per_cap: 1,
            boxes: boxes.len(),
            predicted,
        }],
        boxes,
        log: vec![format!("cone-square grid with {} caps", predicted.round())],
    })
}

struct PieceOutput {
    footprints: Vec<CapFootprint>,
    counts: Vec<StageCount>,
    log: Vec<String>,
}

fn nondegenerate_piece(p: &Profile, j: Interval, delta: f64, piece: u32) -> PieceOutput {
    let fps = partition_nondegenerate(p, j, delta, piece);
    let arclength = caps::ArclengthTable::new(p, j, 1024).total();
    let predicted = TAU * j.mid() * arclength / delta;
    PieceOutput {
        counts: vec![StageCount {
            piece,
            case: PieceCase::Nondegenerate,
            side: Side::Full,
            k: 0,
            first_stage: fps.len(),
            per_cap: 1,
            boxes: fps.len(),
            predicted,
        }],
        log: vec![format!(
            "piece {piece}: nondegenerate [{}, {}) with {} caps",
            j.lo,
            j.hi,
            fps.len()
        )],
        footprints: fps,
    }
}

fn plate_piece(j: Interval, delta: f64, piece: u32) -> PieceOutput {
    let fps = plate_footprints(j, delta, piece);
    PieceOutput {
        counts: vec![StageCount {
            piece,
            case: PieceCase::Cone,
            side: Side::Full,
            k: 0,
            first_stage: fps.len(),
            per_cap: 1,
            boxes: fps.len(),
            predicted: TAU / delta.sqrt(),
        }],
        log: vec![format!("piece {piece}: cone plates, {} sectors", fps.len())],
        footprints: fps,
    }
}

fn degenerate_piece(p: &Profile, z: &ZeroPoint, delta: f64, piece: u32) -> Result<PieceOutput> {
    let model = LeadingModel::at(p, z)?;
    let delta_eff = delta / model.lead.abs();
    let annuli = dyadic_annuli_at(z.r, z.n, delta_eff, z.delta)?;
    let mut log = vec![format!(
        "piece {piece}: {} n={} at r={} with Δ={}, δ_eff={}, {} annuli per side",
        z.case.as_str(),
        z.n,
        z.r,
        z.delta,
        delta_eff,
        annuli.len() / 2
    )];
    let per_annulus: Vec<(Vec<CapFootprint>, StageCount)> = annuli
        .par_iter()
        .map(|a| {
            let first = first_stage_caps(z.case, z.n, z.r, a, piece);
            let plan = SecondStage::plan(z.case, z.n, z.r, a, delta_eff);
            let fps: Vec<CapFootprint> = first.iter().flat_map(|c| second_stage_refine(c, &plan)).collect();
            let (w, radial) = first_stage_dims(z.case, z.n, a.s);
            let first_pred = TAU * z.r / w * (a.radial.len() / radial).max(1.0);
            let per_cap_pred = match plan.rho {
                None => 1.0,
                Some(rho) => {
                    let cap_arc = TAU * z.r / first.len() as f64;
                    (cap_arc / (w * rho)) * (a.radial.len() / (a.s * rho)).max(1.0)
                }
            };
            let count = StageCount {
                piece,
                case: fps[0].stage.case,
                side: a.side,
                k: a.k,
                first_stage: first.len(),
                per_cap: plan.per_cap(),
                boxes: fps.len(),
                predicted: first_pred * per_cap_pred,
            };
            (fps, count)
        })
        .collect();
    let mut footprints = Vec::new();
    let mut counts = Vec::new();
    for (fps, c) in per_annulus {
        log.push(format!(
            "piece {piece} {:?} k={}: {} caps x {} subcaps",
            c.side, c.k, c.first_stage, c.per_cap
        ));
        footprints.extend(fps);
        counts.push(c);
    }
    Ok(PieceOutput {
        footprints,
        counts,
        log,
    })
}

/// Builds the full partition: grids on nondegenerate intervals, plates for a
/// cone, and the two-stage construction on both sides of every degenerate circle.
pub fn build_partition(p: &Profile, delta: f64) -> Result<PartitionManifest> {
    build_partition_with(p, delta, &PartitionOptions::default())
}

pub fn build_partition_with(p: &Profile, delta: f64, opts: &PartitionOptions) -> Result<PartitionManifest> {
    check_delta(delta)?;
    let dec = analyze_structure_with(p, &opts.decompose)?;
    let mut pieces = Vec::new();
    let mut outputs = Vec::new();
    for (index, (interval, zero)) in dec.pieces().into_iter().enumerate() {
        let index = index as u32;
        let (case, out, delta_eff) = match zero {
            None => (
                PieceCase::Nondegenerate,
                nondegenerate_piece(p, interval, delta, index),
                None,
            ),
            Some(z) if z.case == DegeneracyCase::Cone => (PieceCase::Cone, plate_piece(interval, delta, index), None),
            Some(z) => {
                let out = degenerate_piece(p, &z, delta, index)?;
                let lead = LeadingModel::at(p, &z)?.lead;
                let case = if z.case == DegeneracyCase::QuasiTorus {
                    PieceCase::QuasiTorus
                } else {
                    PieceCase::PerturbedCone
                };
                (case, out, Some(delta / lead.abs()))
            }
        };
        pieces.push(PieceInfo {
            index,
            case,
            interval,
            zero,
            delta_eff,
        });
        outputs.push(out);
    }
    let mut log = vec![format!("profile {} delta {delta}", p.id())];
    let mut footprints = Vec::new();
    let mut counts = Vec::new();
    for out in outputs {
        log.extend(out.log);
        footprints.extend(out.footprints);
        counts.extend(out.counts);
    }
    let boxes = attach_frames(&Revolution::new(p), footprints, delta);
    log.push(format!(
        "{} boxes, containment constant {}",
        boxes.len(),
        DEFAULT_CONTAINMENT
    ));
    for line in &log {
        log::info!("{line}");
    }
    Ok(PartitionManifest {
        profile: p.spec(),
        delta,
        pieces,
        boxes,
        counts,
        log,
    })
}

/// Checks that the footprints of every piece tile it exactly: rows chain
/// radially from one end to the other and the sectors of each row chain
/// from `0` to `2π`. Returns a description of every defect.
pub fn check_tiling(m: &PartitionManifest) -> Vec<String> {
    let mut problems = Vec::new();
    let mut by_piece: BTreeMap<u32, Vec<&CapFootprint>> = BTreeMap::new();
    for fp in m.footprints() {
        by_piece.entry(fp.stage.piece).or_default().push(fp);
    }
    for piece in &m.pieces {
        let Some(fps) = by_piece.get(&piece.index) else {
            problems.push(format!("piece {} has no footprints", piece.index));
            continue;
        };
        let mut rows: BTreeMap<(u64, u64), Vec<(f64, f64)>> = BTreeMap::new();
        for fp in fps {
            if !(fp.r1 < fp.r2) || !(fp.alpha1 < fp.alpha2) {
                problems.push(format!("empty footprint {fp:?}"));
            }
            rows.entry((fp.r1.to_bits(), fp.r2.to_bits()))
                .or_default()
                .push((fp.alpha1, fp.alpha2));
        }
        let mut radial: Vec<(f64, f64)> = rows
            .keys()
            .map(|&(a, b)| (f64::from_bits(a), f64::from_bits(b)))
            .collect();
        radial.sort_by(|a, b| a.0.total_cmp(&b.0));
        if radial.first().map(|r| r.0) != Some(piece.interval.lo)
            || radial.last().map(|r| r.1) != Some(piece.interval.hi)
        {
            problems.push(format!("piece {}: rows do not reach both ends", piece.index));
        }
        for w in radial.windows(2) {
            if w[0].1 != w[1].0 {
                problems.push(format!("piece {}: radial gap or overlap at {}", piece.index, w[0].1));
            }
        }
        for ((a, b), mut arcs) in rows {
            arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
            let ok = arcs[0].0 == 0.0 && arcs.last().unwrap().1 == TAU && arcs.windows(2).all(|w| w[0].1 == w[1].0);
            if !ok {
                problems.push(format!(
                    "piece {}: row [{}, {}) does not chain 0..2π",
                    piece.index,
                    f64::from_bits(a),
                    f64::from_bits(b)
                ));
            }
        }
    }
    problems
}

/// Flatness reports for every box, in manifest order.
pub fn flatness_reports(m: &PartitionManifest, p: &Profile, c: f64) -> Vec<FlatnessReport> {
    let surf = Revolution::new(p);
    m.boxes
        .par_iter()
        .map(|b| flatness_check(&b.frame, &surf, &b.footprint, m.delta, c))
        .collect()
}

/// Stage counts whose ratio to the prediction falls outside `[1/factor, factor]`.
pub fn count_violations(m: &PartitionManifest, factor: f64) -> Vec<StageCount> {
    m.counts
        .iter()
        .filter(|c| {
            let ratio = c.boxes as f64 / c.predicted;
            !(ratio <= factor && ratio >= 1.0 / factor)
        })
        .copied()
        .collect()
}

/// Fraction of refined and nondegenerate boxes that stop being flat once
/// their footprint is inflated by `factor` about its center.
pub fn maximality_witness(m: &PartitionManifest, p: &Profile, factor: f64) -> f64 {
    let surf = Revolution::new(p);
    let curved: Vec<&BoxRecord> = m
        .boxes
        .iter()
        .filter(|b| b.footprint.stage.second > 0 || b.footprint.stage.case == PieceCase::Nondegenerate)
        .collect();
    if curved.is_empty() {
        return 0.0;
    }
    let dom = p.domain();
    let failing = curved
        .par_iter()
        .filter(|b| {
            let fp = b.footprint;
            let (_, rm) = fp.center();
            // keep the inflated footprint inside the profile domain
            let room = (rm - dom.lo).min(dom.hi - rm) / (0.5 * (fp.r2 - fp.r1));
            let f = factor.min(room);
            !flatness_check_scaled(&b.frame, &surf, &fp, m.delta, DEFAULT_CONTAINMENT, f).pass
        })
        .count();
    failing as f64 / curved.len() as f64
}

/// A radial row `[r1, r2)` and its sectors as `(α1, box index)`, sorted by `α1`.
type Row = (f64, f64, Vec<(f64, usize)>);

/// Index of the box containing `(α, r)` with `α ∈ [0, 2π)`.
pub struct FootprintIndex {
    rows: Vec<Row>,
}

impl FootprintIndex {
    pub fn new(m: &PartitionManifest) -> Self {
        let mut rows: BTreeMap<(u64, u64), Vec<(f64, usize)>> = BTreeMap::new();
        for (i, fp) in m.footprints().enumerate() {
            rows.entry((fp.r1.to_bits(), fp.r2.to_bits()))
                .or_default()
                .push((fp.alpha1, i));
        }
        let mut rows: Vec<Row> = rows
            .into_iter()
            .map(|((a, b), mut v)| {
                v.sort_by(|x, y| x.0.total_cmp(&y.0));
                (f64::from_bits(a), f64::from_bits(b), v)
            })
            .collect();
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        Self { rows }
    }

    pub fn locate(&self, alpha: f64, r: f64) -> Option<usize> {
        let i = self.rows.partition_point(|row| row.0 <= r);
        if i == 0 {
            return None;
        }
        let (_, r2, ref arcs) = self.rows[i - 1];
        if r >= r2 {
            return None;
        }
        let j = arcs.partition_point(|a| a.0 <= alpha);
        (j > 0).then(|| arcs[j - 1].1)
    }
}
