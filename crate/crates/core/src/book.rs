//! The guide's code samples, checked by rustdoc.

macro_rules! chapter {
    ($name:ident, $file:literal) => {
        #[doc = include_str!(concat!("../../../book/src/", $file))]
        pub struct $name;
    };
}

chapter!(Introduction, "introduction.md");
chapter!(Problems, "problems.md");
chapter!(Preconditioning, "preconditioning.md");
chapter!(Lightcone, "lightcone.md");
chapter!(Solvers, "solvers.md");
chapter!(Diagnostics, "diagnostics.md");
chapter!(Campaigns, "campaigns.md");
chapter!(Grid, "grid.md");
chapter!(Cli, "cli.md");
