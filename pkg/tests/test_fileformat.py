import pytest

from onlinesm import fileformat
from onlinesm.core import MultiStageProblem, TwoStageProblem, Variant
from onlinesm.errors import DuplicateRankError, IncompleteListError, MalformedInputError
from onlinesm.fileformat import ProblemSyntaxError, canonical, parse_problem, parse_text, write_text
from onlinesm.generate import PRNG_NAME, SplitMix64, generate
from onlinesm.lattice import enumerate_stable
from onlinesm.multistage import adversary_stages12, cyclic_block
from onlinesm.reductions import CollegeTwoStageProblem

from conftest import FIXTURES

HEADER = "format smp 1\nkind two-stage\nvariant women-arrive\n"
STAGE = "stage {n}\nmen u1 u2\nwomen w1 w2\nu1: w1 w2\nu2: w2 w1\nw1: u1 u2\nw2: u2 u1\n"


def test_fixture_adversary():
    p = parse_problem(FIXTURES / "adversary_n4.smp")
    assert isinstance(p, TwoStageProblem)
    assert (len(p.stage1.women), len(p.stage2.women)) == (1, 3)
    assert (p.stage1, p.stage2) == adversary_stages12(4)


@pytest.mark.parametrize("name", ["adversary_n4.smp", "small_arrival.smp", "college_small.smp", "three_stage.smp"])
def test_fixtures_round_trip(name):
    p = parse_problem(FIXTURES / name)
    text = write_text(p)
    assert write_text(parse_text(text)) == text
    raw = (FIXTURES / name).read_text()
    assert canonical(raw) == text


def test_fixture_kinds():
    assert isinstance(parse_problem(FIXTURES / "college_small.smp"), CollegeTwoStageProblem)
    assert isinstance(parse_problem(FIXTURES / "three_stage.smp"), MultiStageProblem)


def test_comments_and_blank_lines():
    text = "# a comment\n\n" + HEADER + STAGE.format(n=1) + "\n" + STAGE.format(n=2) + "  # trailing\n"
    p = parse_text(text)
    assert p.stage1 == p.stage2


def test_truncated_list_names_person():
    bad = HEADER + STAGE.format(n=1).replace("u2: w2 w1", "u2: w2") + STAGE.format(n=2)
    with pytest.raises(IncompleteListError) as err:
        parse_text(bad, source="t.smp")
    assert "u2" in str(err.value) and "t.smp" in str(err.value)


def test_duplicate_entry():
    bad = HEADER + STAGE.format(n=1).replace("w1: u1 u2", "w1: u1 u1") + STAGE.format(n=2)
    with pytest.raises(DuplicateRankError) as err:
        parse_text(bad)
    assert "w1" in str(err.value)


@pytest.mark.parametrize("text,line", [
    ("format smp 2\nkind two-stage\nvariant women-arrive\nstage 1\nmen\nwomen\n", 1),
    (HEADER.replace("two-stage", "three-stage"), 2),
    (HEADER + "stage 1\nmen u1 x2\n", 5),
    (HEADER + "stage 2\n", 4),
])
def test_syntax_errors_carry_position(text, line):
    with pytest.raises(ProblemSyntaxError) as err:
        parse_text(text)
    assert err.value.line == line


def test_inconsistent_stages_rejected():
    s2 = STAGE.format(n=2).replace("u1: w1 w2", "u1: w2 w1")
    with pytest.raises(MalformedInputError):
        parse_text(HEADER + STAGE.format(n=1) + s2)


def test_write_is_canonical():
    p = TwoStageProblem(Variant.WOMEN_ARRIVE, cyclic_block(3), cyclic_block(3))
    text = write_text(p)
    assert text.startswith("format smp 1\nkind two-stage\nvariant women-arrive\nstage 1\nmen u1 u2 u3\n")
    assert fileformat.stages_of(parse_text(text)) == [cyclic_block(3), cyclic_block(3)]


def test_splitmix_reference_values():
    # first outputs for seed 0 of the published SplitMix64 generator
    rng = SplitMix64(0)
    assert [rng.next64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    assert PRNG_NAME == "splitmix64-fy/1"


def test_generate_is_deterministic():
    a = write_text(generate("random", 17, men=5, women=5))
    b = write_text(generate("random", 17, men=5, women=5))
    assert a == b
    assert a != write_text(generate("random", 18, men=5, women=5))


def test_cyclic_block_ignores_seed():
    assert write_text(generate("cyclic_block", 1, k=4)) == write_text(generate("cyclic_block", 99, k=4))


def test_generate_adversary_stage12():
    p = generate("adversary3_stage12", 0, n=5)
    assert (p.stage1, p.stage2) == adversary_stages12(5)
    assert len(enumerate_stable(p.stage1)) == 1


@pytest.mark.parametrize("kind,params", [
    ("random", {"men": 3, "women": 4, "variant": "men-leave", "men2": 1}),
    ("random", {"men": 3, "women": 4, "variant": "leave-and-arrive", "men2": 2, "women1": 2}),
    ("multistage_random", {"men": 3, "women_counts": [1, 2, 4]}),
    ("college_random", {"universities": 2, "students": 4, "max_cap": 2, "students1": 2}),
])
def test_generated_problems_round_trip(kind, params):
    p = generate(kind, 5, **params)
    text = write_text(p)
    assert write_text(parse_text(text)) == text


def test_generate_rejects_bad_parameters():
    with pytest.raises(ValueError):
        generate("multistage_random", 0, men=3, women_counts=[3, 1])
    with pytest.raises(ValueError):
        generate("nonsense", 0)
