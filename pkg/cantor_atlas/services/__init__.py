from cantor_atlas.services.root_service import RootService
from cantor_atlas.services.sphere_service import SphereService
from cantor_atlas.services.preset_service import MapSpec, PresetService, parse_complex
from cantor_atlas.services.report_service import ReportService

__all__ = ['RootService', 'SphereService', 'MapSpec', 'PresetService', 'ReportService', 'parse_complex']
