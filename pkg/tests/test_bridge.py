import time

import pytest

from conftest import agent_cmd
from swa_sim.bridge import MALFORMED, BridgeError, BridgeSession
from swa_sim.engine import make_agents, run_episode, run_sweep
from swa_sim.game import GameConfig
from swa_sim.policy import AgentSpec


def one_external(cfg, lam=0.5):
    specs = make_agents(cfg, AgentSpec(0, lam))
    specs[0] = AgentSpec(0, lam, candidate_source="external")
    return specs


class TestSession:
    def test_round_trip(self, cfg):
        with BridgeSession(agent_cmd("echo_agent.py", "0,4,8"), cfg, k=3) as s:
            assert s.propose(1, 0, 4.0, None, None) == [0.0, 4.0, 8.0]
            assert s.propose(2, 0, 4.0, 20.0, 4.0) == [0.0, 4.0, 8.0]

    def test_command_string(self, cfg):
        cmd = " ".join(agent_cmd("echo_agent.py", "1,2"))
        with BridgeSession(cmd, cfg, k=2) as s:
            assert s.propose(1, 0, 4.0, None, None) == [1.0, 2.0]

    def test_garbage_line(self, cfg):
        with BridgeSession(agent_cmd("garbage_agent.py", 1), cfg, k=3) as s:
            assert s.propose(1, 0, 4.0, None, None) is MALFORMED
            assert s.propose(2, 0, 4.0, None, None) == [0, 4, 8]

    def test_timeout_then_stale_reply_skipped(self, cfg):
        with BridgeSession(agent_cmd("slow_agent.py", 0.3), cfg, k=1, timeout=0.05) as s:
            assert s.propose(1, 0, 4.0, None, None) is None
            time.sleep(0.4)
            # reply to request 1 is now queued; it must not be taken as the answer to request 2
            assert s.propose(2, 0, 4.0, None, None) is None

    def test_version_mismatch(self, cfg):
        with pytest.raises(BridgeError, match="protocol"):
            BridgeSession(agent_cmd("wrong_version_agent.py"), cfg, k=3).start()

    def test_missing_executable(self, cfg):
        with pytest.raises(BridgeError):
            BridgeSession(["/nonexistent/agent"], cfg, k=3).start()

    def test_silent_agent_fails_handshake(self, cfg):
        s = BridgeSession(["sleep", "5"], cfg, k=3, handshake_timeout=0.2)
        with pytest.raises(BridgeError, match="hello"):
            s.start()


class TestEpisodes:
    def test_echo_agent_no_fallbacks(self, cfg):
        res = run_episode(cfg, one_external(cfg), seed=0, agent_command=agent_cmd("echo_agent.py", "0,4,8"))
        assert res.fallbacks == 0
        assert len(res.records) == cfg.T

    def test_garbage_on_step_3(self, cfg):
        seen = {}
        res = run_episode(
            cfg,
            one_external(cfg),
            seed=0,
            agent_command=agent_cmd("garbage_agent.py", 3),
            on_step=lambda t, i, a, scored: seen.setdefault((t, i), [s.a for s in scored]),
        )
        assert res.fallbacks == 1
        assert seen[(3, 0)] == [0.0, 4.0, 8.0]

    def test_slow_agent_runs_on_anchors(self):
        cfg = GameConfig(T=3)
        res = run_episode(cfg, one_external(cfg), seed=0, agent_command=agent_cmd("slow_agent.py", 1.0), bridge_timeout=0.05)
        assert res.fallbacks == cfg.T

    def test_fallback_does_not_disturb_other_agents(self, cfg):
        # agents 1..4 draw from their own streams, so their choices match whether or not agent 0 falls back
        good = run_episode(cfg, one_external(cfg, 1.0), seed=4, agent_command=agent_cmd("echo_agent.py", "4"))
        bad = run_episode(cfg, one_external(cfg, 1.0), seed=4, agent_command=agent_cmd("garbage_agent.py", 99))
        assert good.fallbacks == 0 and bad.fallbacks == 0
        assert [r.x for r in good.records] == [r.x for r in bad.records]

    def test_all_external_sweep(self, cfg):
        sw = run_sweep(
            GameConfig(T=4),
            [0, 1],
            [1.6],
            [0],
            AgentSpec(0, 0.0, candidate_source="external"),
            agent_command=agent_cmd("echo_agent.py", "0,4,8"),
        )
        assert [c.overload_rate for c in sw.cells] == [1.0, 0.0]
        assert all(c.fallbacks == 0 for c in sw.cells)

    def test_handshake_failure_aborts_sweep(self, cfg):
        with pytest.raises(BridgeError):
            run_sweep(cfg, [0], [1.6], [0], AgentSpec(0, 0.0, candidate_source="external"),
                      agent_command=agent_cmd("wrong_version_agent.py"))
