pub mod checks;
pub mod corpus;
pub mod fd;
pub mod qp_oracle;
