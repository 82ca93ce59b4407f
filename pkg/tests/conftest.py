import importlib.util
import os
import sys
from pytest import fixture


def _expose_source_package():
    # run the suite from a checkout: core/ is installed as gevreych
    try:
        import gevreych  # noqa: F401
        return
    except ImportError:
        pass
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    spec = importlib.util.spec_from_file_location('gevreych', os.path.join(root, 'core', '__init__.py'),
                                                  submodule_search_locations=[os.path.join(root, 'core')])
    module = importlib.util.module_from_spec(spec)
    sys.modules['gevreych'] = module
    spec.loader.exec_module(module)


_expose_source_package()


@fixture
def small_ch_state():
    from gevreych.initial_data import build_state
    return build_state('CH', {'u': 'cosine amp=0.1'}, 8)


@fixture
def unit_cosine():
    from gevreych.spectral import synthesize
    return synthesize([(1, 0.5)], 8)


@fixture(autouse=True)
def _no_thread_cap(monkeypatch):
    monkeypatch.delenv('GEVREYCH_THREADS', raising=False)
