# database package
from .run_store import RunStore, RunManifest, write_manifest
