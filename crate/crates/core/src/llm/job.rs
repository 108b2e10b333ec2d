use std::collections::{BTreeMap, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Mutex};
use std::time::{Duration, Instant};

use serde::Serialize;

use super::cache::{cache_key, CacheEntry, CachedRequest, ResponseCache};
use super::client::{ChatClient, ChatRequest};
use super::prompt::{build_prompt, PromptMode, PromptSpec, Templates};
use super::response::{parse_response, ResponseFragment};
use super::LlmError;
use crate::corpus::{Corpus, Episode};
use crate::schema::{Annotation, SentenceKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobMode {
    /// One prompt per sentence covering all dimensions.
    Multi,
    /// Five prompts per sentence, one per dimension.
    Single,
}

impl JobMode {
    pub fn short(self) -> &'static str {
        match self {
            JobMode::Multi => "mt",
            JobMode::Single => "st",
        }
    }

    pub fn prompt_modes(self) -> Vec<PromptMode> {
        match self {
            JobMode::Multi => vec![PromptMode::Multi],
            JobMode::Single => PromptMode::SINGLE_TASKS.to_vec(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnnotationJob {
    /// Episodes to annotate; empty means every episode in the corpus.
    pub episodes: Vec<String>,
    pub mode: JobMode,
    /// Annotator id written on the output, e.g. `model:gpt-4o:mt`.
    pub annotator: String,
    pub concurrency: usize,
    /// Extra attempts after a response that does not parse.
    pub retries: usize,
    pub cache_dir: PathBuf,
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    /// Requests per minute; `None` for no limit.
    pub rate_per_min: Option<f64>,
    pub context_before: usize,
    pub context_after: usize,
    pub templates: Templates,
}

impl AnnotationJob {
    pub fn new(model: &str, mode: JobMode, cache_dir: impl Into<PathBuf>) -> Self {
        AnnotationJob {
            episodes: Vec::new(),
            mode,
            annotator: format!("model:{model}:{}", mode.short()),
            concurrency: 4,
            retries: 3,
            cache_dir: cache_dir.into(),
            endpoint: "http://localhost:8000/v1/chat/completions".into(),
            model: model.into(),
            temperature: 0.0,
            rate_per_min: None,
            context_before: 5,
            context_after: 2,
            templates: Templates::default(),
        }
    }
}

/// A sentence task that ended without labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Gap {
    pub key: SentenceKey,
    pub task: String,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct JobReport {
    pub sentences: usize,
    pub prompts: usize,
    pub annotations: usize,
    pub cache_hits: usize,
    pub network_calls: usize,
    /// Attempts beyond the first, summed over prompts.
    pub retries: usize,
    pub gaps: Vec<Gap>,
}

struct Task<'a> {
    ep: &'a Episode,
    key: SentenceKey,
    mode: PromptMode,
    prompt: String,
    cache_key: String,
}

enum Outcome {
    Parsed {
        raw: String,
        fragment: ResponseFragment,
        attempts: usize,
    },
    Failed {
        error: String,
        attempts: usize,
    },
}

/// Token bucket refilled continuously at `per_sec`, holding at most
/// `capacity` tokens.
struct RateLimiter {
    per_sec: f64,
    capacity: f64,
    state: Mutex<(f64, Instant)>,
}

impl RateLimiter {
    fn new(rate_per_min: f64, capacity: usize) -> Self {
        let capacity = capacity.max(1) as f64;
        RateLimiter {
            per_sec: rate_per_min / 60.0,
            capacity,
            state: Mutex::new((capacity, Instant::now())),
        }
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut s = self.state.lock().unwrap();
                let now = Instant::now();
                s.0 =
                    (s.0 + now.duration_since(s.1).as_secs_f64() * self.per_sec).min(self.capacity);
                s.1 = now;
                if s.0 >= 1.0 {
                    s.0 -= 1.0;
                    return;
                }
                (1.0 - s.0) / self.per_sec
            };
            std::thread::sleep(Duration::from_secs_f64(wait));
        }
    }
}

fn request_for(job: &AnnotationJob, prompt: String) -> ChatRequest {
    ChatRequest {
        endpoint: job.endpoint.clone(),
        model: job.model.clone(),
        temperature: job.temperature,
        prompt,
    }
}

fn attempt(
    job: &AnnotationJob,
    task: &Task,
    client: &dyn ChatClient,
    limiter: Option<&RateLimiter>,
    calls: &AtomicUsize,
) -> Outcome {
    let mut last_error = String::new();
    for n in 0..=job.retries {
        let prompt = if n == 0 {
            task.prompt.clone()
        } else {
            format!("{}\n\n{}", task.prompt, job.templates.retry_reminder)
        };
        if let Some(l) = limiter {
            l.acquire();
        }
        calls.fetch_add(1, Ordering::SeqCst);
        match client.complete(&request_for(job, prompt)) {
            Ok(raw) => match parse_response(&raw, task.mode, task.ep) {
                Ok(fragment) => {
                    return Outcome::Parsed {
                        raw,
                        fragment,
                        attempts: n + 1,
                    }
                }
                Err(e) => last_error = format!("parse error: {e}"),
            },
            Err(e) => {
                return Outcome::Failed {
                    error: e.to_string(),
                    attempts: n + 1,
                }
            }
        }
    }
    Outcome::Failed {
        error: last_error,
        attempts: job.retries + 1,
    }
}

/// Annotates every moderator sentence of the selected episodes.
///
/// Cached responses are replayed without touching the client. Misses are
/// sent by `concurrency` worker threads; the calling thread is the only
/// cache writer. Sentences that still lack a dimension after the retry
/// budget are listed as gaps. A failed cache write aborts the job.
pub fn run_job(
    job: &AnnotationJob,
    corpus: &Corpus,
    client: &dyn ChatClient,
) -> Result<(Vec<Annotation>, JobReport), LlmError> {
    let cache = ResponseCache::open(&job.cache_dir).map_err(|e| LlmError::Cache(e.to_string()))?;
    let episodes: Vec<&Episode> = if job.episodes.is_empty() {
        corpus.sorted_episodes()
    } else {
        let mut v = job
            .episodes
            .iter()
            .map(|id| {
                corpus
                    .episode(id)
                    .ok_or_else(|| LlmError::UnknownEpisode(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        v.sort_by(|a, b| a.id().cmp(b.id()));
        v.dedup_by(|a, b| a.id() == b.id());
        v
    };

    let mut report = JobReport::default();
    let mut tasks: Vec<Task> = Vec::new();
    for ep in episodes {
        for (t, turn) in ep.turns().iter().enumerate() {
            if !ep.is_moderator_turn(turn) {
                continue;
            }
            for s in &turn.sentences {
                report.sentences += 1;
                let key = SentenceKey::new(ep.id(), t, s.index);
                for mode in job.mode.prompt_modes() {
                    let spec = PromptSpec {
                        mode,
                        context_before: job.context_before,
                        context_after: job.context_after,
                        templates: job.templates.clone(),
                    };
                    let prompt = build_prompt(ep, &key, &spec)?;
                    let cache_key = cache_key(&job.model, &mode.code(), &prompt);
                    tasks.push(Task {
                        ep,
                        key: key.clone(),
                        mode,
                        prompt,
                        cache_key,
                    });
                }
            }
        }
    }
    report.prompts = tasks.len();

    let mut outcomes: Vec<Option<Outcome>> = (0..tasks.len()).map(|_| None).collect();
    let mut pending: VecDeque<usize> = VecDeque::new();
    for (i, task) in tasks.iter().enumerate() {
        let replay = cache.get(&task.cache_key).and_then(|entry| {
            parse_response(&entry.raw_response, task.mode, task.ep)
                .ok()
                .map(|fragment| Outcome::Parsed {
                    raw: entry.raw_response,
                    fragment,
                    attempts: 0,
                })
        });
        match replay {
            Some(o) => {
                report.cache_hits += 1;
                outcomes[i] = Some(o);
            }
            None => pending.push_back(i),
        }
    }

    if !pending.is_empty() {
        let calls = AtomicUsize::new(0);
        let abort = AtomicBool::new(false);
        let queue = Mutex::new(pending);
        let limiter = job
            .rate_per_min
            .filter(|r| *r > 0.0)
            .map(|r| RateLimiter::new(r, job.concurrency));
        let workers = job.concurrency.max(1);
        let tasks_ref = &tasks;
        let write_error = std::thread::scope(|scope| {
            let (tx, rx) = mpsc::channel::<(usize, Outcome)>();
            for _ in 0..workers {
                let tx = tx.clone();
                let (queue, abort, calls, limiter) = (&queue, &abort, &calls, limiter.as_ref());
                scope.spawn(move || loop {
                    if abort.load(Ordering::SeqCst) {
                        break;
                    }
                    let Some(i) = queue.lock().unwrap().pop_front() else {
                        break;
                    };
                    let outcome = attempt(job, &tasks_ref[i], client, limiter, calls);
                    if tx.send((i, outcome)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            let mut write_error = None;
            for (i, outcome) in rx {
                if let Outcome::Parsed { raw, .. } = &outcome {
                    if write_error.is_none() {
                        let task = &tasks_ref[i];
                        let req = CachedRequest {
                            key: task.cache_key.clone(),
                            endpoint: job.endpoint.clone(),
                            model: job.model.clone(),
                            mode: task.mode.code(),
                            temperature: job.temperature,
                            prompt: task.prompt.clone(),
                        };
                        if let Err(e) = cache.put(&CacheEntry::new(req, raw.clone())) {
                            write_error = Some(e.to_string());
                            abort.store(true, Ordering::SeqCst);
                        }
                    }
                }
                outcomes[i] = Some(outcome);
            }
            write_error
        });
        if let Some(e) = write_error {
            return Err(LlmError::Cache(e));
        }
        report.network_calls = calls.load(Ordering::SeqCst);
    }

    let mut merged: BTreeMap<SentenceKey, ResponseFragment> = BTreeMap::new();
    for (task, outcome) in tasks.iter().zip(outcomes) {
        let entry = merged.entry(task.key.clone()).or_default();
        match outcome {
            Some(Outcome::Parsed {
                fragment, attempts, ..
            }) => {
                report.retries += attempts.saturating_sub(1);
                entry.merge(fragment);
            }
            Some(Outcome::Failed { error, attempts }) => {
                report.retries += attempts.saturating_sub(1);
                report.gaps.push(Gap {
                    key: task.key.clone(),
                    task: task.mode.code(),
                    error,
                });
            }
            None => unreachable!("every task has an outcome"),
        }
    }
    let annotations: Vec<Annotation> = merged
        .into_iter()
        .filter_map(|(key, frag)| frag.into_annotation(key, &job.annotator))
        .collect();
    report.annotations = annotations.len();
    report
        .gaps
        .sort_by(|a, b| (&a.key, &a.task).cmp(&(&b.key, &b.task)));
    Ok((annotations, report))
}
