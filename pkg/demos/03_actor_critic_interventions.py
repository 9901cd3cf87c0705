"""The tabular actor-critic and its intervention knobs.

A reinforcement baseline shifts the actor's effective TD error without
touching the critic; a fully inverted TD-error bonus changes the stored
signal and nothing else (same actions, same weights, bit for bit).
"""

from qualia import BacAgent, BacConfig, chain, episode_statistics, run_aerp

env = chain()


def traces(cfg, n=60, episodes=120, seed0=11):
    return [run_aerp(env, BacAgent(cfg, 3, 2, snapshot_mode="light"), episodes=episodes, seed=(seed0, j))
            for j in range(n)]


vanilla = BacConfig(alpha=0.1, beta=0.1)
baseline = BacConfig(alpha=0.1, beta=0.1, baseline_c=-5.0)

res_v = episode_statistics(traces(vanilla), i_max=120)
res_b = episode_statistics(traces(baseline), i_max=120, delta_offset=-5.0)

print("mean return by episode block (vanilla vs aggressive baseline c=-5):")
for lo in range(0, 120, 30):
    mv = res_v.returns_mean[lo:lo + 30].mean()
    mb = res_b.returns_mean[lo:lo + 30].mean()
    print(f"  episodes {lo:>3}-{lo + 29:>3}: {mv:6.2f} vs {mb:6.2f}")

neg_v = res_v.delta_neg_prop.mean()
neg_b = res_b.delta_neg_prop.mean()
print(f"\nfraction of inhibitory updates (reported TD error < 0): "
      f"{neg_v:.3f} vanilla vs {neg_b:.3f} with c=-5")

# a fully inverted bonus alters only the recorded TD error
bonus = BacConfig(alpha=0.1, beta=0.1, td_bonus=2.0,
                  td_bonus_invert_critic=True, td_bonus_invert_actor=True)
ta = run_aerp(env, BacAgent(vanilla, 3, 2), episodes=20, seed=(3, 3))
tb = run_aerp(env, BacAgent(bonus, 3, 2), episodes=20, seed=(3, 3))
same_actions = all(a.action == b.action for a, b in zip(ta.steps, tb.steps))
shifts = {round(b.td_error - a.td_error, 12) for a, b in zip(ta.steps, tb.steps)
          if a.td_error is not None}
print(f"\nfull bonus inversion: identical actions {same_actions}, stored TD errors shifted by {shifts}")
