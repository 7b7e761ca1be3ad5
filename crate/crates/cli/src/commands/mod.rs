pub mod apply;
pub mod calibrate;
pub mod report;
pub mod simulate;
