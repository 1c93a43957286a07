//! Network services: the edge media proxy, the fusion ingestion API, the
//! sample publisher, the UE-side exporter and a fixture origin server.

pub mod exporter;
pub mod fusion_http;
pub mod origin;
pub mod proxy;
pub mod publisher;
pub mod server;

pub use origin::Origin;
pub use proxy::{Proxy, ProxyConfig, RecordSink, Session};
pub use publisher::{Publisher, PublisherConfig};
pub use server::ServerHandle;
