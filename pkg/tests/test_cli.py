import json

import pytest

from helpers import c4_star_c4, shift_loop, swap_loop

from residuap import catalog, serialize
from residuap.cli import main
from residuap.embed import ElabSpace
from residuap.groups import Homomorphism


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_group_and_catalog(capsys):
    code, out = run(capsys, "group", "--group", "catalog:C4", "--json")
    assert code == 0
    data = json.loads(out)
    assert data["order"] == 4 and data["p"] == 2


def test_filtration_and_algebra(capsys):
    code, out = run(capsys, "filtration", "gamma_p", "--group", "catalog:D8",
                    "--p", "2", "--json")
    assert code == 0 and json.loads(out)["orders"] == [8, 2, 1]
    code, out = run(capsys, "algebra", "jennings", "--group", "catalog:C4",
                    "--p", "2", "--json")
    assert code == 0 and json.loads(out)["orders"] == [4, 2, 1]
    code, out = run(capsys, "algebra", "wreath-class", "--group", "catalog:C3",
                    "--p", "3", "--json")
    assert code == 0 and json.loads(out)["class_gamma"] == 3


def test_congruence_commands(capsys, tmp_path):
    code, out = run(capsys, "congruence", "tower", "--pk", "3:2", "--json")
    assert code == 0 and json.loads(out)["order"] == 648
    code, out = run(capsys, "congruence", "powermap", "--pk", "3:3", "--json")
    assert code == 0 and json.loads(out)["all_injective"]
    f = tmp_path / "ut.json"
    f.write_text(json.dumps({"n": 2, "p": 3, "d": 2, "N": [[0, 1], [0, 0]]}))
    code, out = run(capsys, "congruence", "utorder", "--file", str(f), "--json")
    assert code == 0 and json.loads(out)["order"] == 9
    f2 = tmp_path / "pres.json"
    f2.write_text(json.dumps({"ngens": 2, "relators": [[1, 1, -2, -2, -2]]}))
    code, out = run(capsys, "congruence", "smith", "--file", str(f2), "--json")
    assert code == 0 and json.loads(out)["free_rank"] == 1


def test_gog_certify_exit_codes(capsys, tmp_path):
    # positive instance: exit 0 and a verifiable certificate file
    pos = tmp_path / "shift.json"
    pos.write_text(serialize.dumps({"gog": serialize.gog_to_obj(shift_loop())}))
    cert_file = tmp_path / "cert.json"
    code, out = run(capsys, "gog", "certify", "--file", str(pos), "--p", "3",
                    "--json", "--out", str(cert_file))
    assert code == 0 and json.loads(out)["target_order"] == 81
    code, out = run(capsys, "verify", "--file", str(cert_file), "--json")
    assert code == 0 and json.loads(out)["verified"]
    # negative instance: exit 10
    neg = tmp_path / "swap.json"
    neg.write_text(serialize.dumps({"gog": serialize.gog_to_obj(swap_loop())}))
    code, out = run(capsys, "gog", "certify", "--file", str(neg), "--p", "3",
                    "--json")
    assert code == 10


def test_embed_flag_exit_codes(capsys, tmp_path):
    V = catalog.elementary_abelian(3, 2)
    sp = ElabSpace(V)
    swap_map = {g: sp.elem((sp.vec(g)[1], sp.vec(g)[0])) for g in range(9)}
    f = tmp_path / "swap-f3.json"
    f.write_text(serialize.dumps({
        "group": serialize.group_to_obj(V),
        "partial_automorphisms": [{"map": [[k, v] for k, v in
                                           sorted(swap_map.items())]}]}))
    code, _ = run(capsys, "embed", "flag", "--file", str(f), "--json")
    assert code == 10


def test_embed_higman(capsys, tmp_path):
    C4 = catalog.cyclic(4)
    C2 = catalog.cyclic(2)
    data = {
        "G": serialize.group_to_obj(C4),
        "H": serialize.group_to_obj(C4),
        "U": serialize.group_to_obj(C2),
        "uG": [0, 2], "uH": [0, 2],
        "FG": [[0, 1, 2, 3], [0, 2], [0]],
        "FH": [[0, 1, 2, 3], [0, 2], [0]],
    }
    f = tmp_path / "am.json"
    f.write_text(json.dumps(data))
    code, out = run(capsys, "embed", "higman", "--file", str(f), "--json")
    assert code == 0 and json.loads(out)["W_order"] == 64


def test_gog_quotient_and_cover(capsys, tmp_path):
    gog = c4_star_c4()
    f = tmp_path / "gog.json"
    f.write_text(serialize.dumps({"gog": serialize.gog_to_obj(gog),
                                  "collection": [[0, 2], [0, 2]]}))
    code, out = run(capsys, "gog", "quotient", "--file", str(f), "--json")
    assert code == 0 and json.loads(out)["vertex_orders"] == [2, 2]
    code, out = run(capsys, "gog", "cover", "--file", str(f), "--json")
    assert code == 0 and json.loads(out)["degree"] == 2


def test_catalog_env_override(capsys, tmp_path, monkeypatch):
    custom = tmp_path / "cat"
    custom.mkdir()
    G = catalog.cyclic(6)
    (custom / "Weird.json").write_text(serialize.dumps(serialize.group_to_obj(G)))
    monkeypatch.setenv("RESIDUAP_CATALOG", str(custom))
    code, out = run(capsys, "group", "--group", "catalog:Weird", "--json")
    assert code == 0 and json.loads(out)["order"] == 6


def test_malformed_input_exits_1(capsys, tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    code = main(["gog", "certify", "--file", str(f)])
    assert code == 1
    code = main(["group", "--group", str(tmp_path / "missing.json")])
    assert code == 1


def test_verify_rejects_unknown_kind(capsys, tmp_path):
    f = tmp_path / "x.json"
    f.write_text(json.dumps({"kind": "other"}))
    assert main(["verify", "--file", str(f)]) == 1
