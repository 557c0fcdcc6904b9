"""
dagcheck - 模型引导的 DAG-BFT 一致性测试工具

包含以下模块:
- trace: 抽象动作、抽象状态、轨迹文件与轨迹哈希存储
- model: 可执行的抽象模型（状态迁移、随机游走、轨迹接受与不变量检查）
- consensus: 被测的 DAG-BFT 节点实现
- sim: 确定性离散事件模拟器（虚拟时钟、事件队列、模拟网络）
- mapping: 具体轨迹的抽象与模型轨迹的重放
- conformance: Workflow I / II 交替测试与违规分类
- metrics: TTF / TPS 性能指标
- logger: 结构化日志记录工具
"""

from .logger import slogger
from .violations import REGISTRY, inject_seeded_violation

__version__ = "0.3.0"
__all__ = [
    "slogger",
    "REGISTRY",
    "inject_seeded_violation",
]
