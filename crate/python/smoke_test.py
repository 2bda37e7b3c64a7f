"""Smoke test for the hyperrule Python extension."""

import hyperrule as hr


def main():
    assert hr.classify((0, 1), (2, 3)) == "BEFORE"
    assert hr.compose("MEETS", "MEETS") == ["BEFORE"]
    ok, _ = hr.resolve_time(3, [(0, 1, ["BEFORE"]), (1, 2, ["BEFORE"]), (2, 0, ["BEFORE"])])
    assert not ok

    g = hr.Hypergraph(label="dish")
    g.add_event("Put", ["bacon"], ["pan"], 3, 5)
    g.add_event("Fry", ["pan"], ["pan"], 6, 9)
    assert g.num_events() == 2 and g.is_b_graph()
    again = hr.Hypergraph.from_text(g.to_text())
    assert again.to_text() == g.to_text()
    assert g.walks(["bacon"], num_walks=10, max_steps=2, seed=1)

    rule = hr.Rule("w=0 dish() <- Put(X0,X1) , Fry(X1,X1) | 0 {BEFORE} 1")
    assert rule.evaluate(g)

    graphs = hr.generate(num_pos=20, num_neg=20, noise_events=5, seed=3)
    mined = hr.mine(graphs, "planted", seed=3)
    assert mined, "no rules mined"
    top, count = mined[0]
    print("top rule:", top, "count:", count)

    plain = hr.run_experiment(graphs, "planted", "mrbw", seed=3)
    pc = hr.run_experiment(graphs, "planted", "mrbw-pc", seed=3)
    trained = hr.run_experiment(graphs, "planted", "mrbw-pc-train", seed=3)
    for rec in (plain, pc, trained):
        print(rec)
    assert plain["mrr"] < pc["mrr"] <= trained["mrr"]
    assert abs(hr.mrr([1.0, 2.0, 4.0]) - 1.75 / 3) < 1e-12
    print("smoke test passed")


if __name__ == "__main__":
    main()
