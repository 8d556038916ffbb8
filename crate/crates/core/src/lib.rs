pub mod exactlat;
pub mod sysmodel;
pub mod latpoly;
pub mod galecore;
pub mod desksolver;
pub mod cli;
