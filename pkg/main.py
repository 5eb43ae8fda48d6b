import logging

from config import setup_logging
from explorer_app import ExplorerApp

# 로깅 설정
setup_logging()
logger = logging.getLogger("schwarzga")

# 애플리케이션 실행
if __name__ == "__main__":
    app = ExplorerApp()
    app.run()
