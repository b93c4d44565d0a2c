"""
SQLite database of CLI runs and the artifacts they wrote, plus the
per-directory run manifest.
"""

import json
from dataclasses import dataclass, field, asdict
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine
from sqlalchemy.ext.declarative import declarative_base
from sqlalchemy.orm import sessionmaker

from src.utils.helpers import get_project_root, read_json, write_json

MANIFEST_NAME = "manifest.json"

Base = declarative_base()


class RunModel(Base):
    """SQLAlchemy model for runs table."""
    __tablename__ = 'runs'

    id = Column(String(80), primary_key=True)
    command = Column(String(50), nullable=False)
    config_hash = Column(String(64), nullable=False)
    seed = Column(Integer)
    version = Column(String(20))
    wall_time = Column(Float)
    output_dir = Column(String(1000))
    inputs = Column(Text)  # JSON string
    status = Column(String(20), default='ok')
    created_at = Column(DateTime, default=datetime.now)


class ArtifactModel(Base):
    """SQLAlchemy model for artifacts table; a path belongs to one run."""
    __tablename__ = 'artifacts'

    path = Column(String(1000), primary_key=True)
    run_id = Column(String(80), ForeignKey('runs.id'), nullable=False)
    kind = Column(String(50))


@dataclass
class RunManifest:
    command: str
    config_hash: str
    seed: Optional[int]
    version: str
    wall_time: float = 0.0
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    status: str = 'ok'

    @property
    def run_id(self) -> str:
        return f"{self.command}-{self.config_hash[:12]}-{datetime.now().strftime('%Y%m%d%H%M%S%f')}"

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def write_manifest(out_dir, manifest: RunManifest) -> Path:
    """Write (or replace) the single manifest.json of an output directory."""
    path = Path(out_dir) / MANIFEST_NAME
    write_json(path, manifest.to_dict())
    return path


def read_manifest(out_dir) -> RunManifest:
    return RunManifest(**read_json(Path(out_dir) / MANIFEST_NAME))


class RunStore:
    """Database interface for run and artifact tracking."""

    def __init__(self, db_path: str = None):
        if db_path is None:
            db_path = get_project_root() / "data" / "runs.db"

        db_path = Path(db_path)
        db_path.parent.mkdir(parents=True, exist_ok=True)

        self.engine = create_engine(f'sqlite:///{db_path}')
        Base.metadata.create_all(self.engine)

        Session = sessionmaker(bind=self.engine)
        self.session = Session()

    def record_run(self, manifest: RunManifest, output_dir) -> str:
        """
        Store a run and claim its output files. A path written again by a
        later run moves to that run.
        """
        run_id = manifest.run_id
        try:
            self.session.add(RunModel(
                id=run_id,
                command=manifest.command,
                config_hash=manifest.config_hash,
                seed=manifest.seed,
                version=manifest.version,
                wall_time=manifest.wall_time,
                output_dir=str(output_dir),
                inputs=json.dumps(manifest.inputs),
                status=manifest.status,
            ))
            for path in manifest.outputs:
                existing = self.session.query(ArtifactModel).filter_by(path=str(path)).first()
                kind = Path(path).suffix.lstrip('.') or 'file'
                if existing:
                    existing.run_id = run_id
                    existing.kind = kind
                else:
                    self.session.add(ArtifactModel(path=str(path), run_id=run_id, kind=kind))
            self.session.commit()
            return run_id
        except Exception as e:
            self.session.rollback()
            raise e

    def get_run(self, run_id: str) -> Optional[RunModel]:
        return self.session.query(RunModel).filter_by(id=run_id).first()

    def get_runs(self, limit: int = 100, command: str = None) -> List[RunModel]:
        """Runs ordered by creation time, newest first."""
        query = self.session.query(RunModel)
        if command:
            query = query.filter_by(command=command)
        return query.order_by(RunModel.created_at.desc()).limit(limit).all()

    def artifacts_for(self, run_id: str) -> List[ArtifactModel]:
        return self.session.query(ArtifactModel).filter_by(run_id=run_id).all()

    def owner_of(self, path) -> Optional[str]:
        artifact = self.session.query(ArtifactModel).filter_by(path=str(path)).first()
        return artifact.run_id if artifact else None

    def get_stats(self) -> Dict[str, Any]:
        """Get database statistics."""
        by_command = {}
        for (command,) in self.session.query(RunModel.command).distinct():
            by_command[command] = self.session.query(RunModel).filter_by(command=command).count()
        return {
            'total_runs': self.session.query(RunModel).count(),
            'failed_runs': self.session.query(RunModel).filter(RunModel.status != 'ok').count(),
            'artifacts': self.session.query(ArtifactModel).count(),
            'by_command': by_command,
        }

    def close(self):
        """Close the database session."""
        self.session.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()
