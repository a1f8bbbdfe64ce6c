"""
Emitted documents carry the keys and enum values the published schemas declare
"""
import json
from pathlib import Path

import pytest

from cantor_atlas.certify_engine import Certify
from cantor_atlas.services.report_service import ReportService
from cantor_atlas.wreath_engine import WreathAlgebra

SCHEMAS = Path(__file__).parent / 'schemas'


def _schema(name):
    with open(SCHEMAS / name, encoding='utf-8') as fh:
        return json.load(fh)


@pytest.fixture(scope="module")
def certificate_schema():
    return _schema('certificate.schema.json')


def test_certificate_matches_schema(certificate_schema, quadratic_4):
    doc = ReportService.to_jsonable(Certify.classify(quadratic_4))
    props = certificate_schema['properties']
    assert set(certificate_schema['required']) <= set(doc)
    assert doc['schema'] == props['schema']['const']
    assert doc['kind'] in props['kind']['enum']
    assert doc['verdict'] in props['verdict']['enum']
    run_schema = props['parameters']['properties']['run']
    assert set(run_schema['required']) <= set(doc['parameters']['run'])
    assert doc['parameters']['map']['preset'] in props['parameters']['properties']['map']['properties']['preset']['enum']


def test_every_kind_and_verdict_is_declared(certificate_schema):
    from cantor_atlas.models import CertificateKind, Verdict

    props = certificate_schema['properties']
    assert {k.value for k in CertificateKind} <= set(props['kind']['enum'])
    assert {v.value for v in Verdict} <= set(props['verdict']['enum'])


def test_recursion_table_matches_schema():
    schema = _schema('recursion_table.schema.json')
    doc = ReportService.to_jsonable(WreathAlgebra.quartic_recursion_table(2))
    assert set(schema['required']) <= set(doc)
    assert doc['degree'] >= schema['properties']['degree']['minimum']
    for entry in doc['recursion'].values():
        assert set(schema['properties']['recursion']['additionalProperties']['required']) <= set(entry)
        assert min(entry['permutation']) >= 1
        assert all(i != 0 for slot in entry['slots'] for i in slot)
