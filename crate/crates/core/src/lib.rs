pub mod bv;
pub mod lang;
pub mod sat;
pub mod exec;
pub mod encode;
pub mod maxsat;
pub mod bmc;
pub mod localize;
pub mod repair;
pub mod report;
