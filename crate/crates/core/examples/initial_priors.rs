//! Draws initial particles from each prior on the checkerboard and reports
//! how many already satisfy the chance constraint.
//!
//! cargo run --release --example initial_priors

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use svprm::envs::{gen_checkerboard, CheckerboardSpec};
use svprm::models::FeasibilityModel;
use svprm::sampling::{draw_prior, MixtureComponent, Prior, SamplerContext};

fn main() -> svprm::Result<()> {
    let spec = CheckerboardSpec::default();
    let model = gen_checkerboard(&spec)?.field;
    let space = spec.space();
    let (s, g) = spec.corner_query();
    let mixture =
        vec![MixtureComponent { mean: s.to_vec(), std: 0.1 }, MixtureComponent { mean: g.to_vec(), std: 0.1 }];
    let ctx = SamplerContext { space: &space, model: &model, beta: 0.5, mixture: &mixture, halton_skip: 0 };
    for prior in
        [Prior::Uniform, Prior::Halton, Prior::GaussianMixture, Prior::UniformRejection, Prior::HaltonRejection]
    {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let pts = draw_prior(prior, &ctx, 200, &mut rng)?;
        let ok = pts.iter().filter(|p| model.probability(p) >= 0.5).count();
        println!("{:>6}: {ok}/200 particles above the threshold", prior.short());
    }
    Ok(())
}
