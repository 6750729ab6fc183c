//! Quiz sessions: the question a student is answering, kept server-side so
//! the solution never travels to the client before it is revealed.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use physquiz_core::QuizQuestion;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuizSession {
    pub session_id: String,
    pub question: QuizQuestion,
    pub attempts: u32,
    /// Unix seconds.
    pub created_at: u64,
    pub expires_at: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SessionError {
    #[error("unknown session `{0}`")]
    UnknownSession(String),
    #[error("session `{0}` has expired")]
    SessionExpired(String),
}

/// Storage for sessions. Implementations synchronise internally; `now` is
/// passed in so callers control the clock.
pub trait SessionStore: Send + Sync {
    fn create(&self, question: QuizQuestion, now: u64) -> QuizSession;

    /// Counts one answer attempt and returns the updated session.
    fn record_attempt(&self, session_id: &str, now: u64) -> Result<QuizSession, SessionError>;

    fn ttl(&self) -> Duration;
}

/// Sessions in a hash map. Expired sessions are kept for one more TTL so
/// late answers get "expired" rather than "unknown", then dropped.
pub struct InMemorySessionStore {
    ttl: Duration,
    sessions: Mutex<HashMap<String, QuizSession>>,
}

impl InMemorySessionStore {
    pub fn new(ttl: Duration) -> Self {
        InMemorySessionStore { ttl, sessions: Mutex::new(HashMap::new()) }
    }

    pub fn len(&self) -> usize {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner()).len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SessionStore for InMemorySessionStore {
    fn create(&self, question: QuizQuestion, now: u64) -> QuizSession {
        let ttl = self.ttl.as_secs();
        let session = QuizSession {
            session_id: uuid::Uuid::new_v4().simple().to_string(),
            question,
            attempts: 0,
            created_at: now,
            expires_at: now.saturating_add(ttl),
        };
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        sessions.retain(|_, s| s.expires_at.saturating_add(ttl) > now);
        sessions.insert(session.session_id.clone(), session.clone());
        session
    }

    fn record_attempt(&self, session_id: &str, now: u64) -> Result<QuizSession, SessionError> {
        let mut sessions = self.sessions.lock().unwrap_or_else(|e| e.into_inner());
        let session = sessions.get_mut(session_id).ok_or_else(|| SessionError::UnknownSession(session_id.into()))?;
        if now >= session.expires_at {
            return Err(SessionError::SessionExpired(session_id.into()));
        }
        session.attempts += 1;
        Ok(session.clone())
    }

    fn ttl(&self) -> Duration {
        self.ttl
    }
}
