"""
Certificates: classification, s-Cantor witnesses, the figure report, census, t-Cantor and replay
"""
import pytest

from cantor_atlas.certify_engine import Certify
from cantor_atlas.config import RunConfig
from cantor_atlas.errors import PreconditionFailed, ReplayMismatch
from cantor_atlas.models import INF, Verdict
from cantor_atlas.services.report_service import ReportService


def test_classify(quartic_3i, quadratic_small):
    cert = Certify.classify(quartic_3i)
    doc = ReportService.to_jsonable(cert)
    assert doc['schema'] == 'cantor-atlas/1'
    assert doc['kind'] == 'classify' and doc['verdict'] == 'pass'
    assert doc['evidence']['cond_c'] is True
    assert doc['parameters']['map'] == {'preset': 'kameyama-quartic', 'a': '0+3i'}
    assert 'simple_domain' in doc['evidence']

    cert = Certify.classify(quadratic_small)
    assert cert.verdict == Verdict.FAIL.value
    assert 'simple_domain' not in cert.evidence


def test_claim1_certificate():
    cert = Certify.claim1(RunConfig(seed=3))
    assert cert.verdict == 'pass'
    assert cert.parameters == {'run': {'seed': 3, 'threads': RunConfig().threads, 'tolerances': {}}}
    assert cert.evidence['quotient']['order'] == 8


def test_growth_bound_for_quartic(quartic_3i):
    report = Certify._growth_check(quartic_3i, 3j)
    assert report == {'samples': 10_000, 'violations': 0}


def test_quadratic_is_s_cantor(quadratic_4):
    cert = Certify.s_cantor_witness(quadratic_4, 1)
    assert cert.verdict == Verdict.S_CANTOR.value
    witness = cert.evidence['witness']
    assert witness['candidate'] == {'kind': 'round', 'center': [0.0, 0.0], 'radius': 3.0}
    assert witness['min_clearance'] > 0.3
    assert [c['degree'] for c in witness['curves']] == [1, 1]
    assert [t['passed'] for t in cert.evidence['tried']] == [False, False, True]
    assert cert.evidence['census_consistent'] is True
    assert cert.parameters['tube'] == {'margin': 0.05, 'min_width': 1e-3}


def test_tube_width_floor_is_recorded(quadratic_4):
    run = RunConfig(tolerances={'tube_min_width': 1e-4})
    with run.applied():
        cert = Certify.s_cantor_witness(quadratic_4, 1, [{'kind': 'tube', 'center': [0, 0], 'radius': 3}], run)
    assert cert.parameters['tube'] == {'margin': 0.05, 'min_width': 1e-4}
    assert cert.parameters['run']['tolerances'] == {'tube_min_width': 1e-4}
    again = Certify.replay(ReportService.to_jsonable(cert))
    assert again.parameters['tube']['min_width'] == 1e-4


def test_explicit_candidate(quadratic_4):
    cert = Certify.s_cantor_witness(quadratic_4, 1, [{'kind': 'round', 'center': [0, 0], 'radius': 1.5}])
    assert cert.verdict == Verdict.ALL_FAILED.value
    assert cert.parameters['candidates'] == [{'kind': 'round', 'center': [0.0, 0.0], 'radius': 1.5}]


def test_bad_candidates_rejected(quadratic_4):
    with pytest.raises(ValueError):
        Certify.s_cantor_witness(quadratic_4, 1, [{'kind': 'square', 'radius': 1}])
    with pytest.raises(ValueError):
        Certify.s_cantor_witness(quadratic_4, 1, [{'kind': 'round', 'radius': -1}])
    with pytest.raises(ValueError):
        Certify.s_cantor_witness(quadratic_4, 0)


def test_s_cantor_needs_cond_c(quadratic_small):
    with pytest.raises(PreconditionFailed):
        Certify.s_cantor_witness(quadratic_small, 1)


def test_quartic_has_no_first_iterate_witness(quartic_figure):
    cert = Certify.s_cantor_witness(quartic_figure, 1)
    assert cert.verdict == Verdict.ALL_FAILED.value
    assert len(cert.evidence['tried']) == 8
    rounds = [t for t in cert.evidence['tried'] if t['candidate']['kind'] == 'round']
    assert all(t['reason'] == "critical values of the iterate lie in the disc" for t in rounds)


@pytest.mark.slow
def test_quartic_second_iterate(quartic_figure):
    cert = Certify.s_cantor_witness(quartic_figure, 2)
    assert cert.parameters["n"] == 2
    rounds = [t for t in cert.evidence["tried"] if t["candidate"]["kind"] == "round"]
    assert rounds and not any(t["passed"] for t in rounds)
    assert cert.verdict == Verdict.S_CANTOR.value
    witness = cert.evidence["witness"]
    assert witness["passed"] and witness["reason"] == "ok"
    assert witness["candidate"]["kind"] == "tube"
    assert witness["keyholes"]
    assert all(1e-3 <= h["width"] <= 0.05 for h in witness["keyholes"])
    assert witness["min_clearance"] >= 1e-4
    assert len(witness["curves"]) > 0
    assert cert.evidence["census_consistent"] is True
    assert cert.parameters["tube"] == {"margin": 0.05, "min_width": 1e-3}


def test_census_of_quadratic(quadratic_4):
    cert = Certify.basin_census(quadratic_4)
    assert cert.verdict == 'pass'
    assert cert.evidence['target'] == 0
    assert len(cert.evidence['levels']) == 1
    assert cert.parameters['attractor'] == "infinity"


@pytest.mark.slow
def test_census_of_quartic(quartic_3i):
    cert = Certify.basin_census(quartic_3i, INF)
    assert cert.evidence['target'] == 4
    assert cert.verdict == 'pass'
    assert cert.evidence['count'] >= 4


def test_t_cantor_of_quadratic(quadratic_4):
    cert = Certify.t_cantor_test(quadratic_4)
    assert cert.verdict == Verdict.INJECTIVE_AT_QUOTIENT.value
    assert cert.evidence['cut_system']['tracked'] == []
    assert cert.evidence['nucleus']['limit'] == ["()"]
    assert sorted(cert.evidence['recursion']['generators']) == ['C0', 'C1', 'C2']
    finiteness = cert.evidence['finiteness']
    assert finiteness['section_closed'] is True
    assert finiteness['orders'][0] == {'level': 1, 'points': 2, 'order': 2}


def test_t_cantor_needs_cond_c(quadratic_small):
    with pytest.raises(PreconditionFailed):
        Certify.t_cantor_test(quadratic_small)


@pytest.mark.slow
def test_t_cantor_of_quartic(quartic_3i):
    cert = Certify.t_cantor_test(quartic_3i)
    assert cert.verdict == Verdict.NOT_T_CANTOR.value
    assert cert.evidence['nucleus']['witness'] == {'element': "(1,0)", 'word': "1", 'moved_to': "2"}
    assert [c['case'] for c in cert.evidence['cases']] == [1, 2, 3, 4]
    assert cert.evidence['claim3']['holds']


@pytest.mark.slow
def test_figure_report():
    cert = Certify.figure1_report(1.665j)
    assert cert.verdict == 'pass'
    level1, level2 = cert.evidence['level1'], cert.evidence['level2']
    assert len(level1['curves']) == 4 and len(level2['curves']) == 8
    assert len(level1['annuli']) == 2 and len(level2['annuli']) == 4
    assert 'growth' not in cert.evidence
    again = Certify.replay(ReportService.to_jsonable(cert))
    assert ReportService.to_jsonable(again) == ReportService.to_jsonable(cert)


@pytest.mark.slow
def test_figure_report_far_parameter():
    cert = Certify.figure1_report(3j)
    assert cert.verdict == 'pass'
    assert cert.parameters['a'] == '0+3i'
    assert cert.evidence['growth'] == {'samples': 10_000, 'violations': 0}
    assert len(cert.evidence['level1']['curves']) == 4
    assert len(cert.evidence['level2']['curves']) == 8


def test_replay_reproduces_t_cantor(quadratic_4, tmp_path):
    cert = Certify.t_cantor_test(quadratic_4)
    path = ReportService.emit_report(cert, tmp_path / "t-cantor.json")
    again = Certify.replay(ReportService.load(path))
    assert again.verdict == Verdict.INJECTIVE_AT_QUOTIENT.value
    assert ReportService.to_jsonable(again) == ReportService.load(path)


def test_replay_reproduces_s_cantor(quadratic_4, tmp_path):
    cert = Certify.s_cantor_witness(quadratic_4, 1)
    path = ReportService.emit_report(cert, tmp_path / "s-cantor.json")
    again = Certify.replay(ReportService.load(path))
    assert again.verdict == Verdict.S_CANTOR.value
    assert ReportService.to_jsonable(again) == ReportService.load(path)

    document = ReportService.load(path)
    document['evidence']['witness']['min_clearance'] += 1.0
    with pytest.raises(ReplayMismatch) as info:
        Certify.replay(document)
    assert info.value.evidence['differing'] == ['evidence']


def test_replay_reproduces_classify(quartic_3i, tmp_path):
    cert = Certify.classify(quartic_3i)
    path = ReportService.emit_report(cert, tmp_path / "classify.json")
    again = Certify.replay(ReportService.load(path))
    assert ReportService.to_jsonable(again) == ReportService.load(path)


def test_replay_detects_tampering(quadratic_4):
    document = ReportService.to_jsonable(Certify.classify(quadratic_4))
    document['verdict'] = 'fail'
    with pytest.raises(ReplayMismatch) as info:
        Certify.replay(document)
    assert info.value.evidence['differing'] == ['verdict']


def test_replay_rejects_foreign_documents():
    with pytest.raises(PreconditionFailed):
        Certify.replay({'kind': 'monodromy', 'parameters': {}})
    with pytest.raises(PreconditionFailed):
        Certify.replay({'verdict': 'pass'})
