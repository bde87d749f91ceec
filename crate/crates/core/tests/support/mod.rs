pub mod cascade_oracle;
pub mod stats;
