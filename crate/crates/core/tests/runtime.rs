use std::collections::BTreeSet;

use depbalance::{
    AssetId, BalancingConfig, CeasefirePolicy, Controller, DestructionEvent, Holdings, MatchState, MissingPrerequisite,
    Player, PlayerId, PlayerInstance, RuntimeError, Scenario,
};
use proptest::prelude::*;

fn ids(s: &Scenario) -> Vec<AssetId> {
    s.graph().sorted_ids()
}

fn everything(s: &Scenario, count: u32) -> Holdings {
    ids(s).into_iter().map(|a| (a, count)).collect()
}

fn one(asset: &str) -> Holdings {
    Holdings::from_iter([(AssetId::from(asset), 1)])
}

fn state_with(ai: Holdings, human: Holdings, resources: u64) -> MatchState {
    MatchState::new([
        PlayerInstance {
            player: Player::new("ai", Controller::Ai),
            holdings: ai,
            resources,
        },
        PlayerInstance {
            player: Player::new("human", Controller::HumanProxy),
            holdings: human,
            resources,
        },
    ])
    .unwrap()
}

fn config(s: &Scenario, enabled: bool) -> BalancingConfig {
    BalancingConfig {
        enabled,
        protected_players: BTreeSet::from([PlayerId::new("human")]),
        policy: s.policy().clone(),
    }
}

fn hit(time: u64, victim: &str, attacker: &str, asset: &str) -> DestructionEvent {
    DestructionEvent {
        time,
        victim: victim.into(),
        attacker: attacker.into(),
        asset: asset.into(),
        count: 1,
    }
}

#[test]
fn base_destroyed_at_100_blocks_until_1000() {
    let s = Scenario::battle();
    let cfg = config(&s, true);
    let mut st = state_with(everything(&s, 1), everything(&s, 1), 0);
    let update = st
        .on_destruction(&hit(100, "human", "ai", "Base"), &cfg)
        .unwrap()
        .unwrap();
    assert_eq!(update.window.restricted_player, PlayerId::new("ai"));
    assert_eq!(update.window.end_time, 1000);
    assert_eq!(update.duration, 900);
    assert_eq!(update.previous_end, None);

    let ai = PlayerId::new("ai");
    assert!(!st.is_attack_allowed(&ai, 100).unwrap());
    assert!(!st.is_attack_allowed(&ai, 999).unwrap());
    assert!(st.is_attack_allowed(&ai, 1000).unwrap());
    // the victim is not restricted
    assert!(st.is_attack_allowed(&PlayerId::new("human"), 100).unwrap());
    assert_eq!(st.player(&PlayerId::new("human")).unwrap().holdings.count("Base"), 0);
}

#[test]
fn no_window_without_prior_destruction() {
    let s = Scenario::battle();
    let st = state_with(everything(&s, 1), everything(&s, 1), 0);
    assert!(st.is_attack_allowed(&PlayerId::new("ai"), 0).unwrap());
    assert_eq!(st.window_end(&PlayerId::new("ai")), None);
}

#[test]
fn unprotected_victim_and_leaf_assets_open_no_window() {
    let s = Scenario::battle();
    let cfg = config(&s, true);
    let mut st = state_with(everything(&s, 1), everything(&s, 1), 0);
    assert_eq!(
        st.on_destruction(&hit(10, "ai", "human", "Barrack"), &cfg).unwrap(),
        None
    );
    assert_eq!(st.window_end(&PlayerId::new("human")), None);
    assert_eq!(
        st.on_destruction(&hit(20, "human", "ai", "Diplomat"), &cfg).unwrap(),
        None
    );
    assert_eq!(st.window_end(&PlayerId::new("ai")), None);
    // the destructions still happened
    assert_eq!(st.player(&PlayerId::new("ai")).unwrap().holdings.count("Barrack"), 0);
    assert_eq!(
        st.player(&PlayerId::new("human")).unwrap().holdings.count("Diplomat"),
        0
    );
}

#[test]
fn windows_extend_but_never_shorten() {
    let s = Scenario::battle();
    let cfg = config(&s, true);
    let mut st = state_with(everything(&s, 1), everything(&s, 2), 0);
    let ai = PlayerId::new("ai");
    st.on_destruction(&hit(100, "human", "ai", "Barrack"), &cfg).unwrap();
    assert_eq!(st.window_end(&ai), Some(350));
    let u = st
        .on_destruction(&hit(100, "human", "ai", "Soldiers"), &cfg)
        .unwrap()
        .unwrap();
    assert_eq!(u.window.end_time, 350);
    assert_eq!(u.previous_end, Some(350));
    st.on_destruction(&hit(200, "human", "ai", "Bank"), &cfg).unwrap();
    assert_eq!(st.window_end(&ai), Some(750));
}

#[test]
fn invalid_destructions_leave_state_untouched() {
    let s = Scenario::battle();
    let cfg = config(&s, true);
    let mut st = state_with(Holdings::default(), one("Base"), 0);
    st.advance_to(50).unwrap();
    let before = st.clone();
    let cases = [
        (hit(10, "human", "ai", "Base"), "time"),
        (hit(60, "human", "human", "Base"), "self"),
        (hit(60, "human", "ai", "Bank"), "holdings"),
        (hit(60, "nobody", "ai", "Base"), "player"),
        (hit(60, "human", "ai", "Nope"), "asset"),
        (
            DestructionEvent {
                count: 0,
                ..hit(60, "human", "ai", "Base")
            },
            "count",
        ),
    ];
    for (ev, what) in cases {
        assert!(st.on_destruction(&ev, &cfg).is_err(), "{what}");
        assert_eq!(st, before, "{what}");
    }
}

#[test]
fn creation_reports_missing_prerequisites() {
    let s = Scenario::battle();
    let mut st = state_with(Holdings::default(), one("Base"), 1000);
    let err = st
        .apply_creation(s.graph(), &"human".into(), &"Barrack".into(), 0, 10)
        .unwrap_err();
    let RuntimeError::MissingPrerequisites { missing, .. } = err else {
        panic!("unexpected {err}");
    };
    assert_eq!(
        missing,
        vec![MissingPrerequisite {
            prerequisite: "Bank".into(),
            required_count: 1,
            have_count: 0,
        }]
    );
    st.apply_creation(s.graph(), &"human".into(), &"Bank".into(), 0, 10)
        .unwrap();
    st.apply_creation(s.graph(), &"human".into(), &"Barrack".into(), 0, 10)
        .unwrap();
    let human = st.player(&"human".into()).unwrap();
    assert_eq!(human.resources, 980);
    assert_eq!(human.holdings.count("Barrack"), 1);
}

#[test]
fn creation_needs_resources() {
    let s = Scenario::battle();
    let mut st = state_with(Holdings::default(), one("Base"), 5);
    let err = st
        .apply_creation(s.graph(), &"human".into(), &"Bank".into(), 0, 10)
        .unwrap_err();
    assert!(matches!(
        err,
        RuntimeError::InsufficientResources { need: 10, have: 5, .. }
    ));
    assert_eq!(st.player(&"human".into()).unwrap().holdings.count("Bank"), 0);
}

#[test]
fn creation_allowed_during_own_ceasefire() {
    let s = Scenario::battle();
    let cfg = config(&s, true);
    let mut st = state_with(one("Base"), everything(&s, 1), 100);
    st.on_destruction(&hit(100, "human", "ai", "Base"), &cfg).unwrap();
    assert!(!st.is_attack_allowed(&"ai".into(), 500).unwrap());
    st.apply_creation(s.graph(), &"ai".into(), &"Bank".into(), 500, 10)
        .unwrap();
    assert_eq!(st.player(&"ai".into()).unwrap().holdings.count("Bank"), 1);
}

#[test]
fn zero_policy_never_blocks() {
    let s = Scenario::battle();
    let cfg = BalancingConfig {
        policy: CeasefirePolicy::zero(s.totals().clone()),
        ..config(&s, true)
    };
    let mut st = state_with(everything(&s, 1), everything(&s, 1), 0);
    for a in ids(&s) {
        assert_eq!(
            st.on_destruction(&hit(5, "human", "ai", a.as_str()), &cfg).unwrap(),
            None
        );
    }
    assert!(st.is_attack_allowed(&"ai".into(), 5).unwrap());
}

// ---------------------------------------------------------------------------
// Random event sequences
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
enum Op {
    Destroy {
        dt: u64,
        ai_attacks: bool,
        asset: usize,
    },
    Create {
        dt: u64,
        human: bool,
        asset: usize,
        cost: u64,
    },
}

fn ops() -> impl Strategy<Value = Vec<Op>> {
    let op = prop_oneof![
        (0u64..400, any::<bool>(), 0usize..14).prop_map(|(dt, ai_attacks, asset)| Op::Destroy {
            dt,
            ai_attacks,
            asset
        }),
        (0u64..400, any::<bool>(), 0usize..14, 0u64..30).prop_map(|(dt, human, asset, cost)| Op::Create {
            dt,
            human,
            asset,
            cost
        }),
    ];
    prop::collection::vec(op, 0..60)
}

/// Applies `ops`, skipping rejected ones, and checks per-step invariants.
fn run_ops(s: &Scenario, cfg: &BalancingConfig, ops: &[Op]) -> Result<MatchState, TestCaseError> {
    let all = ids(s);
    let mut st = state_with(everything(s, 2), everything(s, 2), 200);
    let (ai, human) = (PlayerId::new("ai"), PlayerId::new("human"));
    let mut t = 0;
    for op in ops {
        let before = st.clone();
        match *op {
            Op::Destroy { dt, ai_attacks, asset } => {
                t += dt;
                let (att, vic) = if ai_attacks { (&ai, &human) } else { (&human, &ai) };
                let ev = DestructionEvent {
                    time: t,
                    victim: vic.clone(),
                    attacker: att.clone(),
                    asset: all[asset].clone(),
                    count: 1,
                };
                match st.on_destruction(&ev, cfg) {
                    Ok(update) => {
                        let prev = before.window_end(att);
                        let now = st.window_end(att);
                        // windows never shrink; only the attacker's window moves
                        prop_assert!(now >= prev);
                        prop_assert_eq!(st.window_end(vic), before.window_end(vic));
                        let dur = cfg.policy.duration(all[asset].as_str()).unwrap();
                        let fires = cfg.enabled && dur > 0 && cfg.protected_players.contains(vic);
                        prop_assert_eq!(update.is_some(), fires);
                        if let Some(u) = update {
                            prop_assert_eq!(Some(u.window.end_time), now);
                            prop_assert_eq!(u.window.end_time, prev.unwrap_or(0).max(t + dur));
                        } else {
                            prop_assert_eq!(now, prev);
                        }
                    }
                    Err(_) => prop_assert_eq!(&st, &before),
                }
            }
            Op::Create {
                dt,
                human: h,
                asset,
                cost,
            } => {
                t += dt;
                let who = if h { &human } else { &ai };
                if st.apply_creation(s.graph(), who, &all[asset], t, cost).is_err() {
                    prop_assert_eq!(&st, &before);
                }
            }
        }
        if !cfg.enabled {
            prop_assert!(st.is_attack_allowed(&ai, st.time()).unwrap());
            prop_assert!(st.is_attack_allowed(&human, st.time()).unwrap());
        }
        // the unprotected side is never restricted
        prop_assert_eq!(st.window_end(&human), None);
        prop_assert!(st.conservation_holds());
    }
    Ok(st)
}

proptest! {
    #[test]
    fn random_sequences_keep_invariants(ops in ops(), enabled in any::<bool>()) {
        let s = Scenario::battle();
        run_ops(&s, &config(&s, enabled), &ops)?;
    }

    #[test]
    fn replaying_a_sequence_is_deterministic(ops in ops()) {
        let s = Scenario::battle();
        let cfg = config(&s, true);
        let a = run_ops(&s, &cfg, &ops)?;
        let b = run_ops(&s, &cfg, &ops)?;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn attack_allowed_iff_past_window_end(ops in ops(), probe in 0u64..30_000) {
        let s = Scenario::battle();
        let st = run_ops(&s, &config(&s, true), &ops)?;
        let ai = PlayerId::new("ai");
        let expected = st.window_end(&ai).is_none_or(|end| end <= probe);
        prop_assert_eq!(st.is_attack_allowed(&ai, probe).unwrap(), expected);
    }
}
