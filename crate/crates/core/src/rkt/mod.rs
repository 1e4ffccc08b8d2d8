//! Boundedness functionals, the Berezin transform and essential-norm estimates.

mod berezin;
mod boundedness;
mod essnorm;

pub use berezin::{berezin, berezin_decay_profile, berezin_injectivity_probe, shell_points, BerezinProfile, BerezinSample, InjectivityReport};
pub use boundedness::{hankel_rkt_check, rkt_boundedness_check, rkt_product_check, rkt_rule, rkt_toeplitz_symbol_check, RktPair, RktReport, RktValue};
pub use essnorm::{default_probes, default_shells, essential_norm_estimate, probe_image_norm, EssNormReport};
