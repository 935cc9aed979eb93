//! Turns per-segment speed records into a routable [`NetworkGraph`].
//!
//! Segments are classified by average speed into modes 1 (< 20 mph),
//! 2 (20..=40 mph) and 3 (> 40 mph). A link is split with a fictitious node
//! wherever two consecutive segments differ by two modes, and every resulting
//! piece gets the length-weighted mean mode of its segments.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Link, NetworkGraph, NodeId, TrafficMode};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentRecord {
    pub link_from: NodeId,
    pub link_to: NodeId,
    pub seq: u32,
    pub length_mi: f64,
    pub avg_speed_mph: f64,
}

impl SegmentRecord {
    pub fn new(from: u32, to: u32, seq: u32, length_mi: f64, avg_speed_mph: f64) -> Self {
        SegmentRecord {
            link_from: NodeId(from),
            link_to: NodeId(to),
            seq,
            length_mi,
            avg_speed_mph,
        }
    }
}

/// Speed class of a segment: 1 is the most congested.
pub fn classify_segment_mode(avg_speed_mph: f64) -> Result<u8> {
    if !(avg_speed_mph.is_finite() && avg_speed_mph > 0.0) {
        return Err(Error::InvalidSegments(format!(
            "segment speed must be positive, got {avg_speed_mph}"
        )));
    }
    Ok(if avg_speed_mph < 20.0 {
        1
    } else if avg_speed_mph <= 40.0 {
        2
    } else {
        3
    })
}

/// Congestion level for a speed class: 1 is high traffic, 3 is low.
pub fn mode_from_index(index: u8) -> TrafficMode {
    match index {
        1 => TrafficMode::High,
        2 => TrafficMode::Medium,
        _ => TrafficMode::Low,
    }
}

/// Length-weighted mean speed class of `segments`, rounded half up.
pub fn aggregate_link_mode(segments: &[SegmentRecord]) -> Result<TrafficMode> {
    if segments.is_empty() {
        return Err(Error::InvalidSegments("cannot aggregate an empty link".into()));
    }
    let mut weighted = 0.0;
    let mut total = 0.0;
    for s in segments {
        weighted += s.length_mi * f64::from(classify_segment_mode(s.avg_speed_mph)?);
        total += s.length_mi;
    }
    let mean = weighted / total;
    // The small slack keeps exact halves like 2.5 from rounding down.
    let rounded = (mean + 0.5 + 1e-9).floor().clamp(1.0, 3.0) as u8;
    Ok(mode_from_index(rounded))
}

/// Splits one link's ordered segments at every boundary where the speed class
/// jumps by two.
pub fn split_at_mode_jumps(segments: &[SegmentRecord]) -> Result<Vec<Vec<SegmentRecord>>> {
    let mut pieces: Vec<Vec<SegmentRecord>> = Vec::new();
    let mut prev_mode: Option<u8> = None;
    for s in segments {
        let mode = classify_segment_mode(s.avg_speed_mph)?;
        match (prev_mode, pieces.last_mut()) {
            (Some(prev), Some(piece)) if prev.abs_diff(mode) != 2 => piece.push(*s),
            _ => pieces.push(vec![*s]),
        }
        prev_mode = Some(mode);
    }
    Ok(pieces)
}

/// A link after splitting: its chain of nodes and the segments of each piece.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentedLink {
    pub from: NodeId,
    pub to: NodeId,
    pub pieces: Vec<Vec<SegmentRecord>>,
}

/// Groups segments per link, validates them and splits at mode jumps.
/// Links come back ordered by `(from, to)`.
pub fn insert_fictitious_nodes(segments: &[SegmentRecord]) -> Result<Vec<SegmentedLink>> {
    let mut grouped: BTreeMap<(NodeId, NodeId), Vec<SegmentRecord>> = BTreeMap::new();
    for s in segments {
        if s.link_from == s.link_to {
            return Err(Error::InvalidSegments(format!(
                "link {}->{} is a self-loop",
                s.link_from, s.link_to
            )));
        }
        if !(s.length_mi.is_finite() && s.length_mi > 0.0) {
            return Err(Error::InvalidSegments(format!(
                "segment {} of link {}->{} has nonpositive length",
                s.seq, s.link_from, s.link_to
            )));
        }
        classify_segment_mode(s.avg_speed_mph)?;
        grouped.entry((s.link_from, s.link_to)).or_default().push(*s);
    }
    grouped
        .into_iter()
        .map(|((from, to), mut segs)| {
            segs.sort_by_key(|s| s.seq);
            for (expected, s) in segs.iter().enumerate() {
                if s.seq as usize != expected {
                    let reason = if expected > 0 && segs[expected - 1].seq == s.seq {
                        "duplicate"
                    } else {
                        "missing or out-of-range"
                    };
                    return Err(Error::InvalidSegments(format!(
                        "link {from}->{to}: {reason} segment seq {}",
                        s.seq
                    )));
                }
            }
            Ok(SegmentedLink {
                from,
                to,
                pieces: split_at_mode_jumps(&segs)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkModeAssignment {
    pub from: NodeId,
    pub to: NodeId,
    pub mode: TrafficMode,
    /// Original link this piece came from.
    pub source_from: NodeId,
    pub source_to: NodeId,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub fictitious_nodes_added: usize,
    pub links_out: usize,
    pub assignments: Vec<LinkModeAssignment>,
}

/// Builds a graph from raw segments.
///
/// Piece length is the sum of its segment lengths and its speed the
/// length-weighted harmonic mean of segment speeds, so total length and total
/// travel time are both preserved. Fictitious node ids start right above the
/// largest original id.
pub fn build_graph(segments: &[SegmentRecord]) -> Result<(NetworkGraph, PreprocessReport)> {
    let segmented = insert_fictitious_nodes(segments)?;
    let mut next_id = segmented
        .iter()
        .flat_map(|l| [l.from.0, l.to.0])
        .max()
        .unwrap_or(0);

    let mut links = Vec::new();
    let mut assignments = Vec::new();
    let mut added = 0;
    for seg_link in &segmented {
        let mut tail = seg_link.from;
        for (k, piece) in seg_link.pieces.iter().enumerate() {
            let head = if k + 1 == seg_link.pieces.len() {
                seg_link.to
            } else {
                next_id += 1;
                added += 1;
                NodeId(next_id)
            };
            let length: f64 = piece.iter().map(|s| s.length_mi).sum();
            let hours: f64 = piece.iter().map(|s| s.length_mi / s.avg_speed_mph).sum();
            let mode = aggregate_link_mode(piece)?;
            links.push(Link::new(tail, head, length, length / hours, mode)?);
            assignments.push(LinkModeAssignment {
                from: tail,
                to: head,
                mode,
                source_from: seg_link.from,
                source_to: seg_link.to,
            });
            tail = head;
        }
    }
    let report = PreprocessReport {
        fictitious_nodes_added: added,
        links_out: links.len(),
        assignments,
    };
    Ok((NetworkGraph::new(links)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn modes_to_segments(modes: &[u8]) -> Vec<SegmentRecord> {
        modes
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let speed = match m {
                    1 => 15.0,
                    2 => 30.0,
                    _ => 50.0,
                };
                SegmentRecord::new(1, 2, i as u32, 1.0, speed)
            })
            .collect()
    }

    #[test]
    fn classification_thresholds() {
        assert_eq!(classify_segment_mode(15.0).unwrap(), 1);
        assert_eq!(classify_segment_mode(19.999).unwrap(), 1);
        assert_eq!(classify_segment_mode(20.0).unwrap(), 2);
        assert_eq!(classify_segment_mode(40.0).unwrap(), 2);
        assert_eq!(classify_segment_mode(40.001).unwrap(), 3);
        assert_eq!(classify_segment_mode(50.0).unwrap(), 3);
        assert!(classify_segment_mode(0.0).is_err());
        assert!(classify_segment_mode(-5.0).is_err());
    }

    #[test]
    fn splits_only_on_two_mode_jumps() {
        let count = |modes: &[u8]| split_at_mode_jumps(&modes_to_segments(modes)).unwrap().len() - 1;
        assert_eq!(count(&[3, 1]), 1);
        assert_eq!(count(&[3, 2, 2]), 0);
        assert_eq!(count(&[1, 3, 1]), 2);
        assert_eq!(count(&[1, 2, 3, 2, 1]), 0);
    }

    #[test]
    fn mode_aggregation() {
        let agg = |modes: &[u8]| aggregate_link_mode(&modes_to_segments(modes)).unwrap();
        assert_eq!(agg(&[2, 2, 3]), TrafficMode::Medium);
        assert_eq!(agg(&[1]), TrafficMode::High);
        assert_eq!(agg(&[2, 3]), TrafficMode::Low);
        assert_eq!(agg(&[1, 2]), TrafficMode::Medium);
        assert!(aggregate_link_mode(&[]).is_err());

        // Length weighting: 3 mi of mode 1 outweighs 1 mi of mode 3.
        let segs = vec![
            SegmentRecord::new(1, 2, 0, 3.0, 10.0),
            SegmentRecord::new(1, 2, 1, 1.0, 30.0),
        ];
        assert_eq!(aggregate_link_mode(&segs).unwrap(), TrafficMode::High);
    }

    #[test]
    fn homogeneous_merge() {
        let (g, report) = build_graph(&[
            SegmentRecord::new(1, 2, 0, 2.0, 50.0),
            SegmentRecord::new(1, 2, 1, 3.0, 50.0),
        ])
        .unwrap();
        assert_eq!(g.links().len(), 1);
        let l = g.links()[0];
        assert_eq!((l.length_mi, l.avg_speed_mph, l.mode), (5.0, 50.0, TrafficMode::Low));
        assert_eq!(report.fictitious_nodes_added, 0);
    }

    #[test]
    fn abrupt_change_adds_fictitious_node() {
        let (g, report) = build_graph(&[
            SegmentRecord::new(1, 2, 0, 2.0, 50.0),
            SegmentRecord::new(1, 2, 1, 2.0, 15.0),
        ])
        .unwrap();
        assert_eq!(report.fictitious_nodes_added, 1);
        assert_eq!(g.links().len(), 2);
        let first = g.link(NodeId(1), NodeId(3)).unwrap();
        let second = g.link(NodeId(3), NodeId(2)).unwrap();
        assert_eq!(first.mode, TrafficMode::Low);
        assert_eq!(second.mode, TrafficMode::High);
    }

    #[test]
    fn pass_through_links() {
        let (g, report) = build_graph(&[
            SegmentRecord::new(1, 2, 0, 2.0, 30.0),
            SegmentRecord::new(2, 3, 0, 4.0, 35.0),
        ])
        .unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.links().len(), 2);
        assert_eq!(report.fictitious_nodes_added, 0);
        assert_eq!(report.links_out, 2);
    }

    #[test]
    fn harmonic_speed_preserves_time() {
        let (g, _) = build_graph(&[
            SegmentRecord::new(4, 9, 0, 1.0, 30.0),
            SegmentRecord::new(4, 9, 1, 2.0, 25.0),
        ])
        .unwrap();
        let l = g.links()[0];
        assert!((l.travel_time() - (1.0 / 30.0 + 2.0 / 25.0)).abs() < 1e-12);
    }

    #[test]
    fn bad_sequences_are_rejected() {
        let dup = [
            SegmentRecord::new(1, 2, 0, 1.0, 30.0),
            SegmentRecord::new(1, 2, 0, 1.0, 30.0),
        ];
        assert!(matches!(build_graph(&dup), Err(Error::InvalidSegments(m)) if m.contains("duplicate")));
        let gap = [
            SegmentRecord::new(1, 2, 0, 1.0, 30.0),
            SegmentRecord::new(1, 2, 2, 1.0, 30.0),
        ];
        assert!(build_graph(&gap).is_err());
        assert!(build_graph(&[SegmentRecord::new(1, 2, 0, 0.0, 30.0)]).is_err());
        assert!(build_graph(&[SegmentRecord::new(1, 1, 0, 1.0, 30.0)]).is_err());
    }
}
