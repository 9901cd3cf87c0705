"""The two experiment environments and the value-iteration oracle.

Gridworld: 5x5 cells, -1 per move, episode ends from the bottom-right
corner; the optimal policy takes 8 moves, so the optimal return is -8.
Chain: quit early for 1 or walk to the end for 10; a uniform policy
quits early with probability 0.75.
"""

from qualia import chain, discounted_return_episode, frozen_uniform_agent, gridworld, optimal_return_oracle, run_aerp

grid = gridworld()
print("gridworld moves from cell 1 (top-left):")
for a, name in enumerate(("up", "down", "left", "right")):
    nxt = grid.table[0][a]
    print(f"  {name:>6}: -> {'wall (stay)' if nxt == 0 else 'cell ' + grid.state_labels[nxt]}")
print(f"cell 25 ends the episode under every action: {set(grid.table[24])}")

print(f"\noptimal returns: gridworld {optimal_return_oracle(grid):g}, chain {optimal_return_oracle(chain()):g}")

env = chain()
agent = frozen_uniform_agent(3, 2)
episodes = 20_000
trace = run_aerp(env, agent, episodes=episodes, seed=7)
premature = sum(1 for ep in trace.episodes if ep.len in (1, 2)) / episodes
mean_return = sum(discounted_return_episode(trace, i, 1.0) for i in range(episodes)) / episodes
print(f"\nchain under a frozen uniform policy ({episodes} episodes):")
print(f"  premature-end fraction {premature:.3f} (exact value 0.75)")
print(f"  mean return {mean_return:.3f} (exact value 0.75*1 + 0.25*10 = 3.25)")
