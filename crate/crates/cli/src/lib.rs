//! Problem-file front end for the dilation toolkit: loading, the
//! verification commands, certificates and instance generation.

pub mod certificate;
pub mod commands;
pub mod format;
pub mod generate;
pub mod load;
