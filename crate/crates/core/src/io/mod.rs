//! Reading and writing logs, nets and reports.

pub mod csv_import;
pub mod dot;
pub mod format;
pub mod inject;
pub mod net_text;
pub mod report;

pub use csv_import::{import_crisp, Imported};
pub use format::{parse, serialize, Diagnostic, Parsed, Severity, FORMAT_VERSION};
pub use inject::{inject, Injection};
pub use net_text::{from_text as parse_net, to_text as net_to_text, NET_HEADER};
