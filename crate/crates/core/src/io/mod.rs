//! Configuration, trajectory files, CSV exports and report files.

mod config;
mod csv_out;
mod reports;
mod trajfile;

pub use config::{
    ContactSection, ContractionSection, FellerSection, FunctionalSpec, GridSection, HolderSection, IbpSection,
    InitialKind, InitialSpec, IntegratorSection, InvarianceSection, OutputSection, ProbeSpec, RunConfig,
    SampleSection, StabilitySection, TargetKind, VerifySection, YosidaSection, DEFAULT_CONFIG, TEST_NAMES,
};
pub use csv_out::{export_contacts_csv, export_samples_csv, export_trajectory_csv};
pub use reports::{read_reports, write_reports};
pub use trajfile::{read_trajectory, write_trajectory, FORMAT_VERSION, MAGIC};
