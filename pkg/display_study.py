import streamlit as st
import pandas as pd


def display_study_results(title, frame, orders=None, csv_name="study.csv"):
    """Streamlit에서 수렴 연구 결과 표시

    Args:
        title (str): 제목
        frame (pandas.DataFrame): 결과 표
        orders (dict, optional): 추정기별 관측 차수 라벨
        csv_name (str): 내려받기 파일 이름
    """
    if frame is None or frame.empty:
        st.error("표시할 결과가 없습니다.")
        return

    st.header(title)

    # 관측 차수 요약
    if orders:
        columns = st.columns(len(orders))
        for column, (name, label) in zip(columns, orders.items()):
            with column:
                st.metric(label=f"{name} 관측 차수", value=label)

    tabs = st.tabs(["결과 표", "오차 요약", "CSV"])

    with tabs[0]:
        st.dataframe(frame, hide_index=True)

    with tabs[1]:
        error_columns = [c for c in frame.columns if "error" in c]
        if error_columns:
            summary = pd.DataFrame(
                {
                    "항목": error_columns,
                    "최초": [frame[c].iloc[0] for c in error_columns],
                    "최종": [frame[c].iloc[-1] for c in error_columns],
                    "최대": [frame[c].max() for c in error_columns],
                }
            )
            st.dataframe(summary, hide_index=True)
        else:
            st.info("오차 열이 없습니다.")

    with tabs[2]:
        text = frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
        st.code(text, language="text")
        st.download_button("CSV 내려받기", text, file_name=csv_name, mime="text/csv")


def display_validation_report(report):
    """분할 검증 보고서 표시"""
    st.header("분할 검증")
    columns = st.columns(3)
    columns[0].metric(label="상태", value=report["status"])
    columns[1].metric(label="삼각형 수", value=report["triangle_count"])
    columns[2].metric(label="‖Π‖", value=f"{report['mesh_norm']:.6g}")

    if report["failures"]:
        st.error(f"실패 {len(report['failures'])}건")
        st.dataframe(pd.DataFrame(report["failures"]), hide_index=True)
    else:
        st.success("모든 검사를 통과했습니다.")
