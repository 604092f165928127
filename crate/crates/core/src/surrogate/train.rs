use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoder::{FeatureEncoder, SparseInput};
use super::network::Mlp;
use super::SurrogateError;
use crate::satisfaction::{dataset_hash, LabeledSample, SatisfactionModel, UserContext, NUM_LEVELS};
use crate::seeding;

pub const MODEL_FORMAT_VERSION: u32 = 1;
const MIN_TRAINING_SAMPLES: usize = 100;

/// Architecture and optimizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateSpec {
    pub hidden_layers: Vec<usize>,
    pub learning_rate: f64,
    pub momentum: f64,
    /// Multiplicative learning-rate decay applied after every epoch.
    pub lr_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    /// Oversample minority classes to the majority count.
    pub balance: bool,
}

impl Default for SurrogateSpec {
    fn default() -> Self {
        Self {
            hidden_layers: vec![128, 32, 16, 8],
            learning_rate: 0.02,
            momentum: 0.9,
            lr_decay: 0.9,
            epochs: 20,
            batch_size: 64,
            seed: 0,
            balance: true,
        }
    }
}

impl SurrogateSpec {
    pub fn validate(&self) -> Result<(), SurrogateError> {
        let bad = |m: &str| Err(SurrogateError::InvalidSpec(m.into()));
        if self.hidden_layers.is_empty() || self.hidden_layers.contains(&0) {
            return bad("hidden layers must be non-empty with positive widths");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must be in [0, 1)");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must be in (0, 1]");
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    pub fn with_epochs(&self, epochs: usize) -> Self {
        Self { epochs, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub dataset_hash: String,
    pub samples: usize,
    pub train_accuracy: f64,
    pub fine_tune_rounds: u32,
}

/// A fitted encoder plus classifier; predicts satisfaction levels 1..=5.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedSurrogate {
    pub format_version: u32,
    pub spec: SurrogateSpec,
    pub encoder: FeatureEncoder,
    pub network: Mlp,
    pub meta: TrainingMeta,
}

fn class_of(level: u8) -> usize {
    (level.clamp(1, NUM_LEVELS as u8) - 1) as usize
}

/// Every index once, plus with-replacement draws from each smaller class until
/// all classes match the largest.
pub fn balance_indices<R: Rng + ?Sized>(labels: &[u8], rng: &mut R) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_LEVELS];
    for (i, &l) in labels.iter().enumerate() {
        by_class[class_of(l)].push(i);
    }
    let target = by_class.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = Vec::with_capacity(target * NUM_LEVELS);
    for members in &by_class {
        out.extend_from_slice(members);
        if !members.is_empty() {
            out.extend((members.len()..target).map(|_| members[rng.random_range(0..members.len())]));
        }
    }
    out
}

fn missing_levels(labels: impl Iterator<Item = u8>) -> Vec<u8> {
    let mut seen = [false; NUM_LEVELS];
    for l in labels {
        seen[class_of(l)] = true;
    }
    (0..NUM_LEVELS).filter(|&c| !seen[c]).map(|c| c as u8 + 1).collect()
}

#[allow(clippy::too_many_arguments)]
fn run_epochs<R: Rng + ?Sized>(
    net: &mut Mlp,
    inputs: &[(SparseInput, usize)],
    order: &mut [usize],
    epochs: usize,
    lr: f64,
    momentum: f64,
    decay: f64,
    batch_size: usize,
    rng: &mut R,
) {
    let mut ws = net.workspace();
    let mut grads = net.grads();
    let mut vel = net.grads();
    let mut rate = lr;
    for _ in 0..epochs {
        order.shuffle(rng);
        for batch in order.chunks(batch_size) {
            for &i in batch {
                let (x, c) = &inputs[i];
                net.accumulate(x, *c, &mut ws, &mut grads);
            }
            net.step(&mut grads, &mut vel, rate as f32, momentum as f32, batch.len());
        }
        rate *= decay;
    }
}

/// Trains a classifier from scratch; deterministic given `spec.seed`.
pub fn train(spec: &SurrogateSpec, data: &[LabeledSample]) -> Result<TrainedSurrogate, SurrogateError> {
    spec.validate()?;
    if data.len() < MIN_TRAINING_SAMPLES {
        return Err(SurrogateError::TooFewSamples { needed: MIN_TRAINING_SAMPLES, got: data.len() });
    }
    let missing = missing_levels(data.iter().map(|s| s.satisfaction));
    if !missing.is_empty() {
        return Err(SurrogateError::DegenerateLabels(missing));
    }
    let encoder = FeatureEncoder::fit(data);
    let mut rng = seeding::rng(spec.seed);
    let mut widths = vec![encoder.dim()];
    widths.extend_from_slice(&spec.hidden_layers);
    widths.push(NUM_LEVELS);
    let mut network = Mlp::new(&widths, &mut rng);
    let inputs: Vec<(SparseInput, usize)> = data
        .iter()
        .map(|s| (encoder.encode(&s.context, s.delta as f64), class_of(s.satisfaction)))
        .collect();
    let labels: Vec<u8> = data.iter().map(|s| s.satisfaction).collect();
    let mut order = if spec.balance { balance_indices(&labels, &mut rng) } else { (0..data.len()).collect() };
    run_epochs(
        &mut network,
        &inputs,
        &mut order,
        spec.epochs,
        spec.learning_rate,
        spec.momentum,
        spec.lr_decay,
        spec.batch_size,
        &mut rng,
    );
    let mut model = TrainedSurrogate {
        format_version: MODEL_FORMAT_VERSION,
        spec: spec.clone(),
        encoder,
        network,
        meta: TrainingMeta { dataset_hash: dataset_hash(data), samples: data.len(), train_accuracy: 0.0, fine_tune_rounds: 0 },
    };
    model.meta.train_accuracy = model.accuracy(data);
    Ok(model)
}

impl TrainedSurrogate {
    /// Most likely level; equal scores resolve to the lower level.
    pub fn predict(&self, ctx: &UserContext, delta_kbps: f64) -> u8 {
        let x = self.encoder.encode(ctx, delta_kbps);
        Mlp::argmax(&self.network.logits(&x)) as u8 + 1
    }

    /// Class probabilities for levels 1..=5.
    pub fn probabilities(&self, ctx: &UserContext, delta_kbps: f64) -> Vec<f32> {
        self.network.probabilities(&self.encoder.encode(ctx, delta_kbps))
    }

    /// Fraction of samples whose label is predicted exactly.
    pub fn accuracy(&self, data: &[LabeledSample]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let hits = data.iter().filter(|s| self.predict(&s.context, s.delta as f64) == s.satisfaction).count();
        hits as f64 / data.len() as f64
    }

    /// Continues training on `data` with the frozen encoder; no class balancing.
    pub fn fine_tune(&mut self, data: &[LabeledSample], epochs: usize, learning_rate: f64, seed: u64) {
        if data.is_empty() || epochs == 0 {
            return;
        }
        let inputs: Vec<(SparseInput, usize)> = data
            .iter()
            .map(|s| (self.encoder.encode(&s.context, s.delta as f64), class_of(s.satisfaction)))
            .collect();
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = seeding::rng(seed);
        run_epochs(
            &mut self.network,
            &inputs,
            &mut order,
            epochs,
            learning_rate,
            self.spec.momentum,
            1.0,
            self.spec.batch_size.min(data.len()),
            &mut rng,
        );
        self.meta.fine_tune_rounds += 1;
    }

    pub fn to_json(&self) -> Result<String, SurrogateError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SurrogateError> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != MODEL_FORMAT_VERSION {
            return Err(SurrogateError::UnsupportedVersion(header.format_version));
        }
        let mut model: Self = serde_json::from_str(text)?;
        model.encoder.rebuild_lookup();
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), SurrogateError> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SurrogateError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl SatisfactionModel for TrainedSurrogate {
    fn level(&self, ctx: &UserContext, delta_kbps: f64) -> u8 {
        self.predict(ctx, delta_kbps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::satisfaction::{generate_dataset, zot_level, Persona};

    fn labeled(ctx: UserContext, delta: i64) -> LabeledSample {
        let satisfaction = zot_level(&ctx, delta as f64);
        LabeledSample { given_rate: (ctx.demand_rate as i64 - delta) as u32, delta, satisfaction, context: ctx }
    }

    /// One application per class, each class in its own tolerance band.
    fn clusters() -> Vec<LabeledSample> {
        let mut out = Vec::new();
        for level in 1..=5u8 {
            for k in 0..40 {
                let mut ctx = UserContext::synthetic(0, 1000 + k, 400);
                ctx.application = format!("App{level}");
                let delta = match level {
                    5 => 0,
                    4 => 20 + k as i64,
                    3 => 120 + k as i64,
                    2 => 220 + k as i64,
                    _ => 350 + k as i64,
                };
                out.push(labeled(ctx, delta));
            }
        }
        out
    }

    #[test]
    fn separable_clusters_are_fit_exactly() {
        let data = clusters();
        // A depth-1 threshold on the ratio feature separates the classes.
        let spec = SurrogateSpec { epochs: 60, ..SurrogateSpec::default() };
        let model = train(&spec, &data).unwrap();
        assert_eq!(model.accuracy(&data), 1.0);
    }

    #[test]
    fn zero_epochs_is_chance_level() {
        let data = clusters();
        let mut accs = Vec::new();
        for seed in 0..5 {
            let model = train(&SurrogateSpec::default().with_epochs(0).with_seed(seed), &data).unwrap();
            accs.push(model.accuracy(&data));
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        assert!((mean - 0.2).abs() <= 0.05, "{accs:?}");
    }

    #[test]
    fn same_seed_same_weights() {
        let data = clusters();
        let spec = SurrogateSpec { epochs: 3, ..SurrogateSpec::default() };
        assert_eq!(train(&spec, &data).unwrap(), train(&spec, &data).unwrap());
        assert_ne!(train(&spec, &data).unwrap().network, train(&spec.with_seed(1), &data).unwrap().network);
    }

    #[test]
    fn too_few_samples_and_missing_classes() {
        let data = clusters();
        assert!(matches!(train(&SurrogateSpec::default(), &data[..50]), Err(SurrogateError::TooFewSamples { .. })));
        let no_fives: Vec<_> = data.iter().filter(|s| s.satisfaction != 5).cloned().collect();
        match train(&SurrogateSpec::default(), &no_fives) {
            Err(SurrogateError::DegenerateLabels(m)) => assert_eq!(m, vec![5]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn balancing_reaches_parity() {
        let labels = [1u8, 1, 1, 1, 2, 3, 3, 4, 5, 5];
        let idx = balance_indices(&labels, &mut seeding::rng(0));
        let mut counts = [0; 5];
        for i in &idx {
            counts[class_of(labels[*i])] += 1;
        }
        assert_eq!(counts, [4; 5]);
        for i in 0..labels.len() {
            assert!(idx.contains(&i));
        }
    }

    #[test]
    fn ties_resolve_to_lower_level() {
        let data = clusters();
        let mut model = train(&SurrogateSpec::default().with_epochs(0), &data).unwrap();
        model.network = Mlp::zeros(&model.network.widths());
        assert_eq!(model.predict(&data[0].context, 10.0), 1);
    }

    #[test]
    fn generated_data_memorized_and_full_demand_is_top_level() {
        let data = generate_dataset(&Persona::working_professional(21, 4), 1500, 1).unwrap();
        let (train_set, held) = data.split_at(5000);
        let model = train(&SurrogateSpec { epochs: 15, ..SurrogateSpec::default() }, train_set).unwrap();
        let probe = &train_set[17];
        assert_eq!(model.predict(&probe.context, probe.delta as f64), probe.satisfaction);
        let fives = held.iter().filter(|s| model.predict(&s.context, 0.0) == 5).count();
        assert!(fives as f64 >= 0.95 * held.len() as f64, "{fives}/{}", held.len());
        assert!(model.accuracy(held) > 0.9, "{}", model.accuracy(held));
    }

    #[test]
    fn json_round_trip_and_version_check() {
        let data = clusters();
        let model = train(&SurrogateSpec { epochs: 2, ..SurrogateSpec::default() }, &data).unwrap();
        let text = model.to_json().unwrap();
        let back = TrainedSurrogate::from_json(&text).unwrap();
        for s in &data {
            assert_eq!(back.predict(&s.context, s.delta as f64), model.predict(&s.context, s.delta as f64));
        }
        assert_eq!(back.meta.dataset_hash, dataset_hash(&data));
        let bumped = text.replacen("\"format_version\":1", "\"format_version\":99", 1);
        assert!(matches!(TrainedSurrogate::from_json(&bumped), Err(SurrogateError::UnsupportedVersion(99))));
    }
}
