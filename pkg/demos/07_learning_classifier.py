"""Watch the bucket brigade learn next-action prediction.

The environment shows 5-letter contexts whose last three letters pin
the correct next action (four suffix families).  Matching rules bid a
fraction of their strength, the winner pays its bid backward and banks
the reward, and a periodic GA reseeds the weakest quartile from mined
patterns.  Random guessing sits at 0.25.
"""

from matchdna import LcsConfig, SuffixOracleEnvironment, train


def main():
    config = LcsConfig(max_iterations=30000, ga_period=4000, rng_seed=2)
    env = SuffixOracleEnvironment(config)
    print("suffix families:", env.FAMILIES)

    population, curve = train(env, config)

    print("\nlearning curve (proportion correct per 1000-step block):")
    for iteration, proportion in curve.points:
        if iteration % 5000 == 0 or iteration == curve.points[-1][0]:
            bar = "#" * int(proportion * 40)
            print(f"  {iteration:>6}  {proportion:5.3f}  {bar}")

    rules = sorted(population.rules(), key=lambda r: -r.strength)[:8]
    print("\nstrongest classifiers (condition -> action @ strength):")
    for rule in rules:
        print(f"  {rule.condition} -> {rule.action}  @ {rule.strength:8.1f}")


if __name__ == "__main__":
    main()
