import logging

import streamlit as st

from cli import (
    REGIMES,
    build_area_table,
    build_jacobian_table,
    build_lantern_table,
    build_schwarz_demo_table,
    build_tangent_table,
    parse_doubling_schedule,
    parse_level_schedule,
    parse_point,
)
from display_study import display_study_results, display_validation_report
from errors import SchwarzGAError
from partition import polygon_from_spec, refine_times, triangulate, validate_partition
from surfaces import surface_from_spec, transform_from_spec

logger = logging.getLogger("schwarzga.explorer")

STUDIES = ["슈바르츠 삼각형", "접평면 이중벡터", "곡면 넓이", "슈바르츠 랜턴", "야코비안", "분할 검증"]


class ExplorerApp:
    """수렴 연구 탐색기 클래스"""

    def __init__(self):
        """탐색기 초기화"""
        st.set_page_config(page_title="schwarzga - 수렴 연구 탐색기", page_icon="📐", layout="wide")

        # 세션 상태 초기화
        if "study" not in st.session_state:
            st.session_state.study = STUDIES[0]
        if "result" not in st.session_state:
            st.session_state.result = None
        if "report" not in st.session_state:
            st.session_state.report = None

    def setup_sidebar(self):
        """사이드바 설정: 연구 종류와 입력값"""
        st.sidebar.title("📐 schwarzga")
        study = st.sidebar.selectbox("연구 종류", STUDIES, key="study")
        inputs = {}

        with st.sidebar.expander("입력", expanded=True):
            if study == "슈바르츠 삼각형":
                inputs["m"] = st.text_input("m schedule", value="4:64")
                inputs["threads"] = st.number_input("스레드 수", min_value=1, max_value=16, value=1)
            elif study == "접평면 이중벡터":
                inputs["surface"] = st.text_input("곡면", value="cylinder(rho=1)")
                inputs["regime"] = st.selectbox("regime", ["(정삼각형 축소)", *REGIMES])
                inputs["schedule"] = st.text_input("schedule", value="4:64")
                inputs["at"] = st.text_input("기준점", value="0,0")
            elif study == "곡면 넓이":
                inputs["surface"] = st.text_input("곡면", value="cylinder(rho=1)")
                inputs["polygon"] = st.text_input("다각형", value="rect(0,pi/2,0,1)")
                inputs["levels"] = st.text_input("세분 단계", value="0:3")
            elif study == "슈바르츠 랜턴":
                inputs["surface"] = st.text_input("곡면", value="cylinder(rho=1)")
                inputs["schedule"] = st.text_input("m schedule", value="4,8")
                inputs["regime"] = st.selectbox("regime", list(REGIMES), index=0)
            elif study == "야코비안":
                inputs["transform"] = st.text_input("평면 변환", value="custom(u*u, v)")
                inputs["at"] = st.text_input("기준점", value="1,0")
                inputs["levels"] = st.text_input("축소 단계", value="0:8")
            else:
                inputs["polygon"] = st.text_input("다각형", value="rect(0,1,0,1)")
                inputs["levels"] = st.number_input("세분 단계", min_value=0, max_value=6, value=2)
                inputs["seed"] = st.number_input("시드", min_value=0, value=7)

        if st.sidebar.button("실행", key="run_study"):
            with st.spinner("계산 중입니다..."):
                self.run_study(study, inputs)

    def run_study(self, study, inputs):
        """선택한 연구 실행, 결과를 세션 상태에 저장"""
        st.session_state.result = None
        st.session_state.report = None
        try:
            if study == "슈바르츠 삼각형":
                result = build_schwarz_demo_table(parse_doubling_schedule(inputs["m"]), threads=int(inputs["threads"]))
                st.session_state.result = (study, result)
            elif study == "접평면 이중벡터":
                surface = surface_from_spec(inputs["surface"])
                at = parse_point(inputs["at"])
                if inputs["regime"] in REGIMES:
                    result = build_tangent_table(
                        surface, at, REGIMES[inputs["regime"]], parse_doubling_schedule(inputs["schedule"])
                    )
                else:
                    result = build_tangent_table(surface, at, levels=parse_level_schedule(inputs["schedule"]))
                st.session_state.result = (study, result)
            elif study == "곡면 넓이":
                result = build_area_table(
                    surface_from_spec(inputs["surface"]),
                    polygon_from_spec(inputs["polygon"]),
                    parse_level_schedule(inputs["levels"]),
                )
                st.session_state.result = (study, result)
            elif study == "슈바르츠 랜턴":
                exponent = REGIMES[inputs["regime"]]
                pairs = [(m, m**exponent) for m in parse_doubling_schedule(inputs["schedule"])]
                result = build_lantern_table(surface_from_spec(inputs["surface"]), pairs)
                st.session_state.result = (study, result)
            elif study == "야코비안":
                result = build_jacobian_table(
                    transform_from_spec(inputs["transform"]),
                    parse_point(inputs["at"]),
                    parse_level_schedule(inputs["levels"]),
                )
                st.session_state.result = (study, result)
            else:
                polygon = polygon_from_spec(inputs["polygon"])
                partition = refine_times(triangulate(polygon), int(inputs["levels"]))
                st.session_state.report = validate_partition(partition, polygon, seed=int(inputs["seed"]))
        except SchwarzGAError as exc:
            logger.error(f"{study} 실패: {exc}")
            st.error(f"계산 중 오류가 발생했습니다: {exc}")

    def run(self):
        """애플리케이션 실행"""
        self.setup_sidebar()

        if st.session_state.result is not None:
            study, result = st.session_state.result
            display_study_results(study, result.frame, result.orders, csv_name="study.csv")
        elif st.session_state.report is not None:
            display_validation_report(st.session_state.report)
        else:
            st.info("사이드바에서 연구를 고르고 실행하세요.")
