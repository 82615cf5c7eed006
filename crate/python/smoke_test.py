"""Smoke test for the `textgym` extension module.

Build first:

    cargo build --release -p textgym-py -p textgym-cli
    python3 python/smoke_test.py

The script copies target/release/libtextgym.so to a temporary directory as
textgym.so, imports it, plays a few episodes and checks them against the
`textgym serve` JSON-lines server.
"""

import json
import os
import random
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def find_artifact(name):
    for profile in ("release", "debug"):
        path = os.path.join(ROOT, "target", profile, name)
        if os.path.exists(path):
            return path
    sys.exit(f"{name} not found; build with cargo first")


def load_module():
    tmp = tempfile.mkdtemp(prefix="textgym-py-")
    shutil.copy(find_artifact("libtextgym.so"), os.path.join(tmp, "textgym.so"))
    sys.path.insert(0, tmp)
    import textgym

    return textgym


def play_random(env, rng):
    obs = env.reset()
    trace = [obs]
    done = False
    while not done:
        action = rng.randrange(env.n_actions)
        obs, reward, done, info = env.step(action)
        trace.append((action, obs, reward, done, info))
    return trace


def serve_trace(binary, task, seed, actions_per_episode):
    lines = [json.dumps({"op": "make", "task": task, "seed": seed})]
    for actions in actions_per_episode:
        lines.append(json.dumps({"op": "reset"}))
        lines += [json.dumps({"op": "step", "action": a}) for a in actions]
    lines.append(json.dumps({"op": "close"}))
    out = subprocess.run(
        [binary, "serve"], input="\n".join(lines) + "\n", capture_output=True, text=True, check=True
    ).stdout
    return [json.loads(line) for line in out.splitlines()]


def main():
    tg = load_module()
    print("textgym", tg.__version__)

    assert tg.token_f1(["LOC", "O"], ["LOC", "O"]) == 1.0
    assert abs(tg.set_f1(["quant-ph", "cs.IT", "math.IT"], ["cs.IT", "math.IT"]) - 0.8) < 1e-12

    env = tg.Env("seqtag", seed=3)
    print(env)
    assert env.observation_dim == sum(n for _, _, n in env.layout)
    obs = env.reset()
    assert len(obs) == env.observation_dim
    while not env.done:
        env.step(env.oracle_action())
    assert env.total_reward == 1.0
    assert env.transcript()["true_label"] == env.transcript()["predicted_label"]

    qa = tg.Env("qa", featurizer="informed", seed=1)
    qa.reset()
    obs, reward, done, info = qa.step("CONT")
    print(qa.render())
    assert qa.action_names[:2] == ["ANS", "CONT"]

    try:
        tg.Env("qa", featurizer="hash")
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("hash featurizer accepted for qa")

    binary = find_artifact("textgym")
    rng = random.Random(0)
    for task in ("seqtag", "mlc", "qa"):
        env = tg.Env(task, seed=5)
        episodes = [play_random(env, rng) for _ in range(5)]
        responses = serve_trace(binary, task, 5, [[step[0] for step in ep[1:]] for ep in episodes])
        assert responses[0]["ok"] and responses[0]["actions"] == env.action_names
        stream = iter(responses[1:])
        for ep in episodes:
            reset = next(stream)
            assert reset["observation"] == ep[0], task
            for action, obs, reward, done, info in ep[1:]:
                r = next(stream)
                assert (r["observation"], r["reward"], r["done"], r["info"]) == (obs, reward, done, info), task
        assert next(stream) == {"ok": True}
        print(f"{task}: 5 random episodes match the JSON-lines server")
    print("smoke test passed")


if __name__ == "__main__":
    main()
