//! Application traffic over a CQI-driven link, and QoS metrics.

pub mod link;
pub mod metrics;
pub mod ota;
pub mod stream;

pub use link::{apply_handover_interruption, serve_queue, AppKind, Delivery, LinkModel, LinkQueue, Packet};
pub use metrics::{read_rows, write_rows, Aggregates, Metric, MetricRow, MetricsCollector, RunMetrics};
pub use ota::{run_ota, OtaConfig, OtaReceiver, OtaSender};
pub use stream::{stream_receiver, FrameSource, FreezeEvent, StreamConfig};
