pub mod agents;
pub mod datakit;
pub mod domain;
pub mod gateway;
pub mod mockkit;
pub mod pipeline;
pub mod prompts;
