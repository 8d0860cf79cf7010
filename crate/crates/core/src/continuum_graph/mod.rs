mod construct;
mod segment;

pub use construct::{
    continuum_graph_construct, glue_surplus_points, kernel_name, rescale_excursion, tilted_excursion,
    ContinuumGraph, GluedGraph, TiltedExcursionSample, TiltedExcursionSampler,
};
pub use segment::{
    sample_point, segment_distance, LengthSampler, NodeId, NodeKind, PointRef, Segment, SegmentGraph, SegmentId,
};
