import json
import logging
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional

from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from ..models.schemas import Classification, RunRecord, SystemKind, TargetResult
from .models import Base, RunModel, TargetResultModel

if TYPE_CHECKING:
    from ..harness.runner import ExperimentReport

logger = logging.getLogger(__name__)


class RunRegistry:
    """SQLite index of finished experiment runs."""

    def __init__(self, db_path: str = "ergoscan.db") -> None:
        self.db_path = Path(db_path)
        self.engine = create_engine(f"sqlite:///{self.db_path}")
        Base.metadata.create_all(self.engine)
        self.SessionLocal = sessionmaker(bind=self.engine)

    def _get_session(self) -> Session:
        return self.SessionLocal()

    def record(self, report: "ExperimentReport", output_dir: str) -> RunRecord:
        session = self._get_session()
        try:
            run_model = RunModel(
                config_hash=report.config_hash,
                system_kind=report.config.system.kind.value,
                point_kind=report.config.point.kind,
                classification=report.classification.value,
                classified_n=report.classified_n,
                output_dir=output_dir,
                timings=json.dumps(report.timings, sort_keys=True),
                report=json.dumps(report.to_json(include_timings=True), sort_keys=True),
            )
            session.add(run_model)
            session.flush()

            best = {t.target: t.best.value if t.best else None for t in report.targets}
            for hits in report.hitsets:
                session.add(
                    TargetResultModel(
                        run_id=run_model.id,
                        target=hits.target,
                        epsilon=hits.epsilon,
                        hit_count=hits.count,
                        best_distance=best.get(hits.target),
                    )
                )
            session.commit()
            logger.info("recorded run %d (%s)", run_model.id, report.classification.value)
            return self._to_record(run_model, include_report=False)
        finally:
            session.close()

    def get(self, run_id: int) -> Optional[RunRecord]:
        session = self._get_session()
        try:
            run_model = session.query(RunModel).filter(RunModel.id == run_id).first()
            if not run_model:
                return None
            return self._to_record(run_model, include_report=True)
        finally:
            session.close()

    def list(
        self,
        classification: Optional[Classification] = None,
        page: int = 1,
        page_size: int = 30,
    ) -> List[RunRecord]:
        session = self._get_session()
        try:
            query = session.query(RunModel)
            if classification is not None:
                query = query.filter(RunModel.classification == classification.value)
            query = query.order_by(RunModel.id.desc())
            query = query.offset((page - 1) * page_size).limit(page_size)
            return [self._to_record(m, include_report=False) for m in query.all()]
        finally:
            session.close()

    def delete(self, run_id: int) -> bool:
        session = self._get_session()
        try:
            run_model = session.query(RunModel).filter(RunModel.id == run_id).first()
            if not run_model:
                return False
            session.delete(run_model)
            session.commit()
            return True
        finally:
            session.close()

    @staticmethod
    def _to_record(run_model: RunModel, include_report: bool) -> RunRecord:
        timings = json.loads(run_model.timings) if run_model.timings else {}
        return RunRecord(
            id=run_model.id,
            config_hash=run_model.config_hash,
            system_kind=SystemKind(run_model.system_kind),
            point_kind=run_model.point_kind,
            classification=Classification(run_model.classification),
            classified_n=run_model.classified_n,
            output_dir=run_model.output_dir,
            total_seconds=timings.get("total"),
            created_at=run_model.created_at,
            results=[
                TargetResult(
                    target=r.target,
                    epsilon=r.epsilon,
                    hit_count=r.hit_count,
                    best_distance=r.best_distance,
                )
                for r in sorted(run_model.results, key=lambda r: r.id)
            ],
            report=json.loads(run_model.report) if include_report else None,
        )
