from sqlalchemy import Column, DateTime, Float, ForeignKey, Index, Integer, String, Text
from sqlalchemy.orm import declarative_base, relationship
from sqlalchemy.sql import func

Base = declarative_base()


class RunModel(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, autoincrement=True)
    config_hash = Column(String(64), nullable=False)
    system_kind = Column(String(50), nullable=False)
    point_kind = Column(String(50), nullable=False)
    classification = Column(String(80), nullable=False)
    classified_n = Column(Integer, nullable=False)
    output_dir = Column(Text, nullable=False)
    timings = Column(Text, default="{}")
    report = Column(Text, nullable=False)
    created_at = Column(DateTime, default=func.now())

    results = relationship("TargetResultModel", back_populates="run", cascade="all, delete-orphan")

    __table_args__ = (
        Index("idx_runs_config_hash", "config_hash"),
        Index("idx_runs_classification", "classification"),
        Index("idx_runs_created_at", "created_at"),
    )


class TargetResultModel(Base):
    __tablename__ = "target_results"

    id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.id", ondelete="CASCADE"), nullable=False)
    target = Column(String(200), nullable=False)
    epsilon = Column(Float, nullable=False)
    hit_count = Column(Integer, default=0)
    best_distance = Column(Float, nullable=True)

    run = relationship("RunModel", back_populates="results")

    __table_args__ = (Index("idx_target_results_run_id", "run_id"),)
