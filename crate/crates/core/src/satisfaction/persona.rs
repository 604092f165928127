//! Persona-driven synthetic context stream.
//!
//! Each user runs a Markov chain over (location, activity) whose location
//! transitions depend on the time period. Requests start application sessions
//! that persist until the next request; each session fixes a demand rate. The
//! tolerance `max_delta` is a fraction of the demand that depends on location,
//! time period and application.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{zot_level, LabeledSample, SatisfactionError, UserContext, ZOT_THRESHOLDS};
use crate::seeding::{self, Rng};

pub const TIME_PERIODS: [&str; 4] = ["Morning", "Afternoon", "Evening", "Night"];

fn period_index(hour: u32) -> usize {
    match hour {
        6..=11 => 0,
        12..=17 => 1,
        18..=21 => 2,
        _ => 3,
    }
}

fn speed_range(speed_kmh: f64) -> &'static str {
    if speed_kmh < 10.0 {
        "low"
    } else if speed_kmh < 50.0 {
        "medium"
    } else {
        "high"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceProfile {
    pub name: String,
    /// Inclusive demand range, kbps.
    pub demand_kbps: (u32, u32),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AppProfile {
    pub name: String,
    pub services: Vec<ServiceProfile>,
    pub service_probs: Vec<f64>,
}

/// Behavioral parameters of a family of users.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Persona {
    pub name: String,
    pub seed: u64,
    pub num_users: u32,
    pub first_user_id: u32,
    pub grid_size: u32,
    pub start: NaiveDateTime,
    pub locations: Vec<String>,
    /// Name of the location whose grid cell is redrawn every slot.
    pub moving_location: Option<String>,
    /// `[period][from][to]`, per-slot probabilities.
    pub location_transitions: Vec<Vec<Vec<f64>>>,
    pub activities: Vec<String>,
    /// `[location][from][to]`, per-slot probabilities.
    pub activity_transitions: Vec<Vec<Vec<f64>>>,
    /// Uniform speed range per activity, km/h.
    pub activity_speed_kmh: Vec<(f64, f64)>,
    /// Probability that a new request arrives in a slot, per location.
    pub request_prob: Vec<f64>,
    pub applications: Vec<AppProfile>,
    /// `[location][application]`.
    pub app_probs: Vec<Vec<f64>>,
    /// Tolerance as a fraction of demand, `[location][period][application]`.
    pub tolerance: Vec<Vec<Vec<f64>>>,
    /// Distribution of the satisfaction level targeted when drawing the given rate,
    /// index 0 is level 1.
    pub given_level_probs: [f64; 5],
}

fn leave_matrix(leave: [f64; 4], dest: [[f64; 4]; 4]) -> Vec<Vec<f64>> {
    (0..4)
        .map(|from| {
            (0..4)
                .map(|to| {
                    if from == to {
                        1.0 - leave[from]
                    } else {
                        leave[from] * dest[from][to]
                    }
                })
                .collect()
        })
        .collect()
}

fn sticky_matrix(change: f64, dest: [f64; 4]) -> Vec<Vec<f64>> {
    (0..4)
        .map(|from| {
            (0..4)
                .map(|to| change * dest[to] + if from == to { 1.0 - change } else { 0.0 })
                .collect()
        })
        .collect()
}

fn service(name: &str, lo: u32, hi: u32) -> ServiceProfile {
    ServiceProfile { name: name.into(), demand_kbps: (lo, hi) }
}

impl Persona {
    /// The working-professional persona: home, work, commuting, occasional
    /// errands, with messaging and streaming applications.
    pub fn working_professional(seed: u64, num_users: u32) -> Self {
        let locations: Vec<String> =
            ["home", "work", "transit", "other"].iter().map(|s| s.to_string()).collect();
        let location_transitions = vec![
            // Morning
            leave_matrix(
                [1.0 / 2400.0, 1.0 / 14400.0, 1.0 / 600.0, 1.0 / 1800.0],
                [
                    [0.0, 0.0, 1.0, 0.0],
                    [0.0, 0.0, 0.5, 0.5],
                    [0.05, 0.8, 0.0, 0.15],
                    [0.0, 0.0, 1.0, 0.0],
                ],
            ),
            // Afternoon
            leave_matrix(
                [1.0 / 5400.0, 1.0 / 7200.0, 1.0 / 600.0, 1.0 / 1800.0],
                [
                    [0.0, 0.0, 0.6, 0.4],
                    [0.0, 0.0, 0.8, 0.2],
                    [0.3, 0.5, 0.0, 0.2],
                    [0.0, 0.0, 1.0, 0.0],
                ],
            ),
            // Evening
            leave_matrix(
                [1.0 / 10800.0, 1.0 / 1200.0, 1.0 / 600.0, 1.0 / 2400.0],
                [
                    [0.0, 0.0, 0.5, 0.5],
                    [0.0, 0.0, 1.0, 0.0],
                    [0.7, 0.0, 0.0, 0.3],
                    [0.4, 0.0, 0.6, 0.0],
                ],
            ),
            // Night
            leave_matrix(
                [1.0 / 36000.0, 1.0 / 1800.0, 1.0 / 600.0, 1.0 / 1200.0],
                [
                    [0.0, 0.0, 0.0, 1.0],
                    [0.0, 0.0, 1.0, 0.0],
                    [1.0, 0.0, 0.0, 0.0],
                    [0.5, 0.0, 0.5, 0.0],
                ],
            ),
        ];
        let activities: Vec<String> =
            ["Sitting", "Standing", "Walking", "Driving"].iter().map(|s| s.to_string()).collect();
        let activity_transitions = vec![
            sticky_matrix(1.0 / 120.0, [0.7, 0.2, 0.1, 0.0]),
            sticky_matrix(1.0 / 120.0, [0.6, 0.2, 0.2, 0.0]),
            sticky_matrix(1.0 / 90.0, [0.0, 0.2, 0.4, 0.4]),
            sticky_matrix(1.0 / 120.0, [0.3, 0.3, 0.4, 0.0]),
        ];
        let applications = vec![
            AppProfile {
                name: "WhatsApp".into(),
                services: vec![
                    service("Text", 20, 80),
                    service("Picture", 500, 1200),
                    service("Voice call", 60, 120),
                    service("Video call", 800, 2000),
                ],
                service_probs: vec![0.35, 0.3, 0.2, 0.15],
            },
            AppProfile {
                name: "YouTube".into(),
                services: vec![service("Video SD", 700, 1500), service("Video HD", 2500, 4500)],
                service_probs: vec![0.6, 0.4],
            },
            AppProfile {
                name: "Browser".into(),
                services: vec![service("Web page", 300, 1000)],
                service_probs: vec![1.0],
            },
            AppProfile {
                name: "Spotify".into(),
                services: vec![service("Music", 160, 320)],
                service_probs: vec![1.0],
            },
            AppProfile {
                name: "Netflix".into(),
                services: vec![service("Stream HD", 3000, 5000)],
                service_probs: vec![1.0],
            },
            AppProfile {
                name: "Email".into(),
                services: vec![service("Sync", 100, 300)],
                service_probs: vec![1.0],
            },
        ];
        let app_probs = vec![
            vec![0.25, 0.2, 0.15, 0.1, 0.2, 0.1],
            vec![0.3, 0.05, 0.25, 0.1, 0.0, 0.3],
            vec![0.35, 0.15, 0.1, 0.3, 0.0, 0.1],
            vec![0.3, 0.15, 0.2, 0.15, 0.05, 0.15],
        ];
        let location_base: [f64; 4] = [0.45, 0.25, 0.6, 0.4];
        let period_factor = [0.9, 1.0, 1.1, 1.2];
        let app_factor = [1.0, 0.8, 1.1, 0.7, 0.6, 1.4];
        let tolerance = location_base
            .iter()
            .map(|base| {
                period_factor
                    .iter()
                    .map(|pf| {
                        app_factor.iter().map(|af| (base * pf * af).clamp(0.05, 0.95)).collect()
                    })
                    .collect()
            })
            .collect();
        Persona {
            name: "working-professional".into(),
            seed,
            num_users,
            first_user_id: 0,
            grid_size: 100,
            start: NaiveDate::from_ymd_opt(2018, 1, 8)
                .and_then(|d| d.and_hms_opt(7, 30, 0))
                .expect("valid start time"),
            locations,
            moving_location: Some("transit".into()),
            location_transitions,
            activities,
            activity_transitions,
            activity_speed_kmh: vec![(0.0, 0.5), (0.0, 1.0), (3.0, 6.5), (15.0, 90.0)],
            request_prob: vec![1.0 / 60.0, 1.0 / 90.0, 1.0 / 45.0, 1.0 / 60.0],
            applications,
            app_probs,
            tolerance,
            given_level_probs: [0.2; 5],
        }
    }

    pub fn validate(&self) -> Result<(), SatisfactionError> {
        let bad = |msg: String| Err(SatisfactionError::InvalidPersona(msg));
        let nl = self.locations.len();
        let na = self.activities.len();
        let np = self.applications.len();
        if nl == 0 || na == 0 || np == 0 {
            return bad("locations, activities and applications must be non-empty".into());
        }
        if self.num_users == 0 || self.grid_size == 0 {
            return bad("num_users and grid_size must be positive".into());
        }
        let row_ok = |row: &[f64], len: usize| {
            row.len() == len
                && row.iter().all(|p| (0.0..=1.0).contains(p))
                && (row.iter().sum::<f64>() - 1.0).abs() <= 1e-9
        };
        if self.location_transitions.len() != TIME_PERIODS.len()
            || !self
                .location_transitions
                .iter()
                .all(|m| m.len() == nl && m.iter().all(|r| row_ok(r, nl)))
        {
            return bad("location transition rows must be distributions over locations".into());
        }
        if self.activity_transitions.len() != nl
            || !self
                .activity_transitions
                .iter()
                .all(|m| m.len() == na && m.iter().all(|r| row_ok(r, na)))
        {
            return bad("activity transition rows must be distributions over activities".into());
        }
        if self.activity_speed_kmh.len() != na
            || self.activity_speed_kmh.iter().any(|&(lo, hi)| !(0.0 <= lo && lo <= hi))
        {
            return bad("one non-negative speed range per activity".into());
        }
        if self.request_prob.len() != nl || self.request_prob.iter().any(|p| !(0.0..=1.0).contains(p))
        {
            return bad("one request probability per location".into());
        }
        if self.app_probs.len() != nl || !self.app_probs.iter().all(|r| row_ok(r, np)) {
            return bad("application probabilities must be distributions".into());
        }
        for app in &self.applications {
            if app.services.is_empty() || !row_ok(&app.service_probs, app.services.len()) {
                return bad(format!("service distribution of {}", app.name));
            }
            if app.services.iter().any(|s| s.demand_kbps.0 > s.demand_kbps.1) {
                return bad(format!("demand range of {}", app.name));
            }
        }
        if self.tolerance.len() != nl
            || !self.tolerance.iter().all(|per| {
                per.len() == TIME_PERIODS.len()
                    && per.iter().all(|apps| apps.len() == np && apps.iter().all(|f| (0.0..=1.0).contains(f)))
            })
        {
            return bad("tolerance fractions must lie in [0, 1] for every state".into());
        }
        if !row_ok(&self.given_level_probs, 5) {
            return bad("given-level probabilities must be a distribution".into());
        }
        if let Some(m) = &self.moving_location {
            if !self.locations.contains(m) {
                return bad(format!("unknown moving location {m}"));
            }
        }
        Ok(())
    }
}

fn sample_index(rng: &mut Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding slack: fall back to the last index with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

struct Session {
    app: usize,
    service: usize,
    demand: u32,
}

struct UserState {
    user_id: u32,
    rng: Rng,
    location: usize,
    activity: usize,
    cells: Vec<(u32, u32)>,
    session: Option<Session>,
}

/// Sequential context generator for all users of one persona, one slot at a time.
pub struct ContextStream {
    persona: Persona,
    ts_seconds: u32,
    slot: u64,
    users: Vec<UserState>,
}

impl ContextStream {
    pub fn new(persona: Persona, ts_seconds: u32) -> Result<Self, SatisfactionError> {
        persona.validate()?;
        if persona.request_prob.iter().all(|&p| p == 0.0) {
            return Err(SatisfactionError::EmptyDataset);
        }
        let grid = persona.grid_size;
        let users = (0..persona.num_users)
            .map(|u| {
                let mut rng = seeding::rng(seeding::derive(persona.seed, u as u64 + 1));
                let cells = (0..persona.locations.len())
                    .map(|_| (rng.random_range(0..grid), rng.random_range(0..grid)))
                    .collect();
                UserState {
                    user_id: persona.first_user_id + u,
                    rng,
                    location: 0,
                    activity: 0,
                    cells,
                    session: None,
                }
            })
            .collect();
        Ok(Self { persona, ts_seconds: ts_seconds.max(1), slot: 0, users })
    }

    pub fn persona(&self) -> &Persona {
        &self.persona
    }

    /// Contexts of every user for the next slot.
    pub fn next_slot(&mut self) -> Vec<UserContext> {
        let p = &self.persona;
        let when = p.start + Duration::seconds(self.slot as i64 * self.ts_seconds as i64);
        let period = period_index(when.hour());
        let weekend = matches!(when.weekday(), Weekday::Sat | Weekday::Sun);
        let moving = p.moving_location.as_ref().and_then(|m| p.locations.iter().position(|l| l == m));
        let first = self.slot == 0;
        let contexts = self
            .users
            .iter_mut()
            .map(|user| {
                if !first {
                    user.location = sample_index(&mut user.rng, &p.location_transitions[period][user.location]);
                    user.activity = sample_index(&mut user.rng, &p.activity_transitions[user.location][user.activity]);
                }
                if Some(user.location) == moving {
                    user.cells[user.location] =
                        (user.rng.random_range(0..p.grid_size), user.rng.random_range(0..p.grid_size));
                }
                let (lo, hi) = p.activity_speed_kmh[user.activity];
                let speed = if hi > lo { user.rng.random_range(lo..=hi) } else { lo };
                let speed = (speed * 10.0).round() / 10.0;
                let req_draw: f64 = user.rng.random();
                let mut arrived = req_draw < p.request_prob[user.location];
                // A stream opens with a request so that every slot carries a session.
                if user.session.is_none() {
                    arrived = true;
                }
                if arrived {
                    let app = sample_index(&mut user.rng, &p.app_probs[user.location]);
                    let profile = &p.applications[app];
                    let service = sample_index(&mut user.rng, &profile.service_probs);
                    let (dlo, dhi) = profile.services[service].demand_kbps;
                    let demand = user.rng.random_range(dlo..=dhi);
                    user.session = Some(Session { app, service, demand });
                }
                let s = user.session.as_ref().expect("session opened above");
                let profile = &p.applications[s.app];
                let frac = p.tolerance[user.location][period][s.app];
                let max_delta = ((frac * s.demand as f64).round() as u32).min(s.demand);
                UserContext {
                    user_id: user.user_id,
                    date: when.format("%Y-%m-%d").to_string(),
                    time: when.format("%H:%M:%S").to_string(),
                    day: when.format("%A").to_string(),
                    classified_day: if weekend { "Weekend" } else { "Weekday" }.to_string(),
                    time_period: TIME_PERIODS[period].to_string(),
                    location: user.cells[user.location],
                    location_name: p.locations[user.location].clone(),
                    speed_kmh: speed,
                    speed_range: speed_range(speed).to_string(),
                    activity: p.activities[user.activity].clone(),
                    request_arrived: arrived,
                    application: profile.name.clone(),
                    service: profile.services[s.service].name.clone(),
                    demand_rate: s.demand,
                    min_rate: s.demand - max_delta,
                    max_delta,
                }
            })
            .collect();
        self.slot += 1;
        contexts
    }
}

/// Integer shortfall range `[lo, hi]` (kbps) that lands in `level`, if any.
fn delta_range(level: u8, max_delta: u32, demand: u32) -> Option<(i64, i64)> {
    let m = max_delta as f64;
    let (lo, hi) = match level {
        5 => (0, 0),
        4 => (1, (ZOT_THRESHOLDS[0] * m).floor() as i64),
        3 => ((ZOT_THRESHOLDS[0] * m).floor() as i64 + 1, (ZOT_THRESHOLDS[1] * m).floor() as i64),
        2 => ((ZOT_THRESHOLDS[1] * m).floor() as i64 + 1, (ZOT_THRESHOLDS[2] * m).floor() as i64),
        _ => ((ZOT_THRESHOLDS[2] * m).floor() as i64 + 1, demand as i64),
    };
    (lo <= hi && hi <= demand as i64).then_some((lo, hi))
}

/// One labeled sample per slot per user. The given rate targets a satisfaction
/// level drawn from the persona's level distribution and never exceeds demand;
/// labels come from [`zot_level`].
pub fn generate_dataset(
    persona: &Persona,
    num_slots: usize,
    ts_seconds: u32,
) -> Result<Vec<LabeledSample>, SatisfactionError> {
    let mut stream = ContextStream::new(persona.clone(), ts_seconds)?;
    if num_slots == 0 {
        return Err(SatisfactionError::EmptyDataset);
    }
    let mut label_rng = seeding::rng(seeding::derive(persona.seed, 0x1abe1));
    let mut out = Vec::with_capacity(num_slots * persona.num_users as usize);
    for _ in 0..num_slots {
        for context in stream.next_slot() {
            let target = sample_index(&mut label_rng, &persona.given_level_probs) as u8 + 1;
            let delta = match delta_range(target, context.max_delta, context.demand_rate) {
                Some((lo, hi)) => label_rng.random_range(lo..=hi),
                None => 0,
            };
            let given_rate = (context.demand_rate as i64 - delta) as u32;
            let satisfaction = zot_level(&context, delta as f64);
            out.push(LabeledSample { context, given_rate, delta, satisfaction });
        }
    }
    Ok(out)
}
